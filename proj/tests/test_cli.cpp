#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "fixtures.hpp"
#include "runner.hpp"

using namespace modecouple;
using namespace modecouple::cli;
namespace fs = std::filesystem;

namespace {

std::string config_dir() { return MODECOUPLE_CONFIG_DIR; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) { return slurp(config_dir() + "/" + name + ".yaml"); }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("modecouple_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool has_diag(const std::vector<Diagnostic>& d, Diagnostic::Level level, const std::string& path) {
  for (const auto& x : d)
    if (x.level == level && x.path == path) return true;
  return false;
}

std::size_t errors(const std::vector<Diagnostic>& d) {
  std::size_t n = 0;
  for (const auto& x : d) n += x.level == Diagnostic::Level::error;
  return n;
}

/// Run the tool, capturing stderr; returns the exit status.
int tool(const std::string& args, std::string* err = nullptr) {
  const auto log = fs::temp_directory_path() / "modecouple_test_cli_stderr.txt";
  const std::string cmd = std::string(MODECOUPLE_TOOL) + " " + args + " > /dev/null 2> " + log.string();
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(log.string());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* subcommands[] = {"swap", "cool", "heatrate", "crossing", "bessel", "squeeze"};

}  // namespace

TEST_CASE("fixture configurations parse and convert Hz") {
  for (const char* name : subcommands) {
    CAPTURE(name);
    std::vector<Diagnostic> warnings;
    const auto rc = parse_config(fixture(name), subcommand_from_string(name), {}, &warnings);
    CHECK(warnings.empty());
    CHECK(rc.trap.omega[0] == doctest::Approx(2.0 * constants::pi * 2.6e6).epsilon(1e-15));
    CHECK(rc.prefix == name);
    CHECK(errors(check_config(fixture(name))) == 0);
  }
  const auto swap_rc = parse_config(fixture("swap"), Subcommand::swap);
  CHECK(swap_rc.coupling == doctest::Approx(fixtures::swap_coupling()).epsilon(1e-12));
  CHECK(swap_rc.drive.duration == doctest::Approx(90e-6).epsilon(1e-12));
  CHECK(swap_rc.modes.first == Axis::z);
  const auto cross = parse_config(fixture("crossing"), Subcommand::crossing);
  CHECK(cross.crossing.detunings.front() == doctest::Approx(-2.0 * constants::pi * 30e3));
  CHECK(cross.crossing.spectrum.linewidth == doctest::Approx(2.0 * constants::pi * 1e3));
}

TEST_CASE("invalid configurations name the key path") {
  const auto swap = fixture("swap");
  SUBCASE("negative mass") {
    const auto d = check_config(swap, {{"trap.mass_amu", "-40"}});
    CHECK(has_diag(d, Diagnostic::Level::error, "trap.mass_amu"));
    CHECK_THROWS_AS(parse_config(swap, Subcommand::swap, {{"trap.mass_amu", "-40"}}), ConfigError);
  }
  SUBCASE("unknown keys") {
    CHECK(has_diag(check_config(swap, {{"trap.massive", "1"}}), Diagnostic::Level::error,
                   "trap.massive"));
    CHECK(has_diag(check_config(swap, {{"experiment.cycles", "3"}}), Diagnostic::Level::error,
                   "experiment.cycles"));
    CHECK(has_diag(check_config(swap, {{"colour", "blue"}}), Diagnostic::Level::error, "colour"));
  }
  SUBCASE("wrong types") {
    CHECK(has_diag(check_config(swap, {{"trap.frequencies_hz.x", "fast"}}),
                   Diagnostic::Level::error, "trap.frequencies_hz.x"));
    CHECK(has_diag(check_config(swap, {{"experiment.samples", "1.5"}}), Diagnostic::Level::error,
                   "experiment.samples"));
  }
  SUBCASE("protocol mismatch") {
    CHECK_THROWS_AS(parse_config(swap, Subcommand::cool), ConfigError);
    CHECK(has_diag(check_config(swap, {{"experiment.protocol", "dance"}}),
                   Diagnostic::Level::error, "experiment.protocol"));
  }
  SUBCASE("thermal truncation is an error") {
    const auto d = check_config(swap, {{"experiment.cutoffs", "[30, 80]"}});
    CHECK(has_diag(d, Diagnostic::Level::error, "experiment.cutoffs"));
  }
  SUBCASE("error message carries the path") {
    try {
      parse_config(swap, Subcommand::swap, {{"drive.coupling_hz", "-1"}});
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("drive.coupling_hz") != std::string::npos);
    }
  }
}

TEST_CASE("RWA validity advisory") {
  const auto swap = fixture("swap");
  // g / w_z = 0.02
  const auto d = check_config(swap, {{"drive.coupling_hz", "2e4"}});
  CHECK(errors(d) == 0);
  CHECK(has_diag(d, Diagnostic::Level::warning, "drive.coupling_hz"));
  // 0.005 stays silent, and the full frame silences it
  CHECK(check_config(swap, {{"drive.coupling_hz", "5e3"}}).empty());
  CHECK(check_config(swap, {{"drive.coupling_hz", "2e4"}, {"experiment.frame", "full"}}).empty());
}

TEST_CASE("overrides") {
  CHECK(parse_override("a.b=3").path == "a.b");
  CHECK(parse_override("a.b=[1, 2]").value == "[1, 2]");
  CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
  const auto rc = parse_config(fixture("swap"), Subcommand::swap,
                               {{"seed", "9"}, {"probe.pulse_time_s", "1e-5"}});
  CHECK(rc.seed == 9);
  CHECK(rc.probe.pulse_time == 1e-5);
  CHECK(rc.probe_time(Axis::x) == 1e-5);
}

TEST_CASE("csv round trip") {
  Table t;
  t.columns = {"a", "label", "b"};
  t.add({1.0 / 3.0, std::string("cool 1"), -2.5e-17});
  t.add({6.02214076e23, std::string("with, comma"), 0.0});
  const auto text = to_csv(t);
  CHECK(text.find('#') == std::string::npos);
  const auto back = parse_csv(text);
  CHECK(back.columns == t.columns);
  REQUIRE(back.rows.size() == 2);
  CHECK(std::get<std::string>(back.rows[1][1]) == "with, comma");
  CHECK(to_csv(back) == text);
  // 12 significant digits
  CHECK(format_number(1.0 / 3.0) == "3.33333333333e-01");
  CHECK(std::abs(back.column("a")[0] - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("swap run: out-of-phase exchange near 90 us") {
  const auto dir = scratch("swap");
  auto rc = parse_config(fixture("swap"), Subcommand::swap);
  const auto files = run(rc, dir.string());
  REQUIRE(files.size() == 2);
  const auto t = read_csv((dir / "swap.csv").string());
  CHECK(t.columns ==
        std::vector<std::string>{"t_s", "n_z", "n_x", "p_red_z", "p_red_x", "p_blue_z", "p_blue_x"});
  CHECK(to_csv(t) == slurp((dir / "swap.csv").string()));
  const auto ts = t.column("t_s");
  const auto nz = t.column("n_z");
  const auto nx = t.column("n_x");
  const auto rz = t.column("p_red_z");
  const auto rx = t.column("p_red_x");
  REQUIRE(ts.size() == 91);
  CHECK(ts.back() == doctest::Approx(90e-6));
  CHECK(nz.back() == doctest::Approx(6.0).epsilon(0.02));
  CHECK(nx.back() == doctest::Approx(0.2).epsilon(0.02));
  // occupations cross monotonically, red sidebands move out of phase
  for (std::size_t k = 1; k < ts.size(); ++k) {
    CHECK(nz[k] > nz[k - 1]);
    CHECK(nx[k] < nx[k - 1]);
  }
  CHECK(rz.back() > rz.front() + 0.3);
  CHECK(rx.back() < rx.front() - 0.3);
  const auto manifest = slurp((dir / "swap_manifest.txt").string());
  CHECK(manifest.find("# version: ") != std::string::npos);
  CHECK(manifest.find("# seed: 1") != std::string::npos);
  CHECK(manifest.find("# wall_time_s: ") != std::string::npos);
  CHECK(manifest.find("coupling_hz: 2777.77777778") != std::string::npos);
}

TEST_CASE("heatrate run is reproducible and matches the protocol") {
  const auto a = scratch("heat_a"), b = scratch("heat_b");
  const auto rc = parse_config(fixture("heatrate"), Subcommand::heatrate);
  run(rc, a.string());
  run(rc, b.string());
  const auto ta = slurp((a / "heatrate.csv").string());
  CHECK(ta == slurp((b / "heatrate.csv").string()));

  const auto cfg = fixtures::ca40_trap();
  const auto ref = heating_rate_experiment(cfg, fixtures::cooling_noise(),
                                           fixtures::heating_experiment(Readout::double_swap_via_x));
  const auto table = parse_csv(ta);
  const auto rate = table.column("heating_rate");
  CHECK(rate.front() == doctest::Approx(ref.find("heating_rate")->value).epsilon(1e-6));
  CHECK(rate.front() == doctest::Approx(810.0).epsilon(0.1));
  CHECK(table.column("wait_s").size() == 21);

  auto other = rc;
  other.seed = 2;
  other.heatrate.seed = 2;
  run(other, b.string());
  CHECK(ta != slurp((b / "heatrate.csv").string()));
}

TEST_CASE("crossing with g = 0 gives coincident peak centers") {
  const auto dir = scratch("crossing");
  auto rc = parse_config(fixture("crossing"), Subcommand::crossing,
                         {{"drive.coupling_hz", "0"},
                          {"experiment.detunings_hz", "{start: -10e3, stop: 10e3, points: 3}"},
                          {"shots", "1"}});
  rc.crossing.spectrum.shots = 0;
  run(rc, dir.string());
  const auto t = read_csv((dir / "crossing.csv").string());
  const auto c1 = t.column("center_1_hz"), c2 = t.column("center_2_hz");
  REQUIRE(c1.size() == 3);
  for (std::size_t k = 0; k < c1.size(); ++k) {
    CHECK(c1[k] == c2[k]);
    CHECK(std::abs(c1[k]) < 50.0);
  }
  const auto s = read_csv((dir / "crossing_spectrum.csv").string());
  CHECK(s.rows.size() == 3 * 161);
}

TEST_CASE("bessel and squeeze tables") {
  const auto dir = scratch("bessel");
  run(parse_config(fixture("bessel"), Subcommand::bessel), dir.string());
  const auto t = read_csv((dir / "bessel.csv").string());
  const auto ka = t.column("modulation_index"), car = t.column("carrier");
  for (std::size_t k = 0; k < ka.size(); ++k)
    CHECK(car[k] == doctest::Approx(std::abs(std::cyl_bessel_j(0.0, ka[k]))).epsilon(1e-6));
  CHECK(slurp((dir / "bessel_manifest.txt").string()).find("# fitted: a_per_g") !=
        std::string::npos);

  run(parse_config(fixture("squeeze"), Subcommand::squeeze, {{"experiment.gt", "[0, 0.5, 1]"}}),
      dir.string());
  const auto q = read_csv((dir / "squeeze.csv").string());
  const auto gt = q.column("gt"), nx = q.column("n_x"), w = q.column("witness");
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const double s = std::sinh(gt[k]);
    CHECK(nx[k] == doctest::Approx(s * s).epsilon(0.01));
  }
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[2] < 0.5);
}

TEST_CASE("tool exit codes and output directory") {
  const std::string cfg = config_dir() + "/swap.yaml";
  std::string err;

  SUBCASE("validate") {
    CHECK(tool("validate " + cfg) == 0);
    CHECK(tool("validate " + cfg + " --set trap.mass_amu=-1") == 2);
  }
  SUBCASE("validation failure") {
    CHECK(tool("swap " + cfg + " --set trap.mass_amu=-1 -o " + scratch("x").string(), &err) == 2);
    CHECK(err.find("error kind=validation exit=2") != std::string::npos);
    CHECK(err.find("trap.mass_amu") != std::string::npos);
    CHECK(std::count(err.begin(), err.end(), '\n') == 1);
  }
  SUBCASE("numerical failure") {
    // the squeezed state outgrows a fixed cutoff
    const std::string sq = config_dir() + "/squeeze.yaml";
    CHECK(tool("squeeze " + sq + " --set experiment.cutoff=6 -o " + scratch("y").string(), &err) ==
          3);
    CHECK(err.find("exit=3") != std::string::npos);
  }
  SUBCASE("io failure") {
    CHECK(tool("swap /nonexistent/config.yaml", &err) == 4);
    CHECK(tool("swap " + cfg + " -o /proc/modecouple_cannot_write", &err) == 4);
    CHECK(err.find("kind=io") != std::string::npos);
  }
  SUBCASE("environment sets the default output directory") {
    const auto dir = scratch("env");
    const std::string cmd = "MODECOUPLE_OUTPUT_DIR=" + dir.string() + " " + MODECOUPLE_TOOL +
                            " bessel " + config_dir() + "/bessel.yaml -q";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "bessel.csv"));
    CHECK(fs::exists(dir / "bessel_manifest.txt"));
  }
}
