#include "runner.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "modecouple/constants.hpp"

namespace modecouple::cli {

using constants::two_pi;

namespace fs = std::filesystem;

std::vector<double> Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != name) continue;
    std::vector<double> out;
    for (const auto& r : rows) {
      if (!std::holds_alternative<double>(r[c]))
        throw ValidationError("table column '" + name + "' is not numeric");
      out.push_back(std::get<double>(r[c]));
    }
    return out;
  }
  throw ValidationError("table has no column '" + name + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        out.back() += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out += (c ? "," : "") + quote(t.columns[c]);
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += ",";
      if (const auto* d = std::get_if<double>(&r[c]))
        out += format_number(*d);
      else
        out += quote(std::get<std::string>(r[c]));
    }
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const Table& t) { write_file(path, to_csv(t)); }

Table parse_csv(const std::string& text) {
  Table t;
  std::stringstream ss(text);
  std::string line;
  bool header = true;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (header) {
      t.columns = std::move(cells);
      header = false;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw Error(ErrorKind::io, "csv row has " + std::to_string(cells.size()) + " cells, header " +
                                     std::to_string(t.columns.size()));
    std::vector<Table::Cell> row;
    for (auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (!c.empty() && end == c.c_str() + c.size())
        row.emplace_back(v);
      else
        row.emplace_back(std::move(c));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_csv(const std::string& path) { return parse_csv(read_file(path)); }

namespace {

std::string axis_name(Axis a) { return to_string(a); }

double measured(const Snapshot& s, const std::string& name, bool error = false) {
  for (const auto& m : s.measured)
    if (m.name == name) return error ? m.error : m.value;
  return std::nan("");
}

RunOutput run_swap(const RunConfig& rc) {
  const auto& p = rc.swap;
  // the exchange moves the larger occupation into both modes
  const std::size_t top = protocol_cutoff(std::max(p.nbar_i, p.nbar_j));
  const std::size_t di = p.cutoff_i ? p.cutoff_i : top;
  const std::size_t dj = p.cutoff_j ? p.cutoff_j : top;
  const auto state = tensor(make_thermal(p.nbar_i, ModeDim(di)), make_thermal(p.nbar_j, ModeDim(dj)));
  SwapOptions opt;
  opt.full_frame = p.full_frame;
  opt.samples = p.samples;
  const auto out = swap(state, rc.trap, rc.drive, rc.modes, opt);

  const Axis a = rc.modes.first, b = rc.modes.second;
  LaserProbe pa = rc.probe, pb = rc.probe;
  pa.mode = a;
  pb.mode = b;
  pa.pulse_time = rc.probe_time(a);
  pb.pulse_time = rc.probe_time(b);

  RunOutput r;
  Table& t = r.tables.emplace_back(rc.prefix, Table{}).second;
  t.columns = {"t_s",
               "n_" + axis_name(a),
               "n_" + axis_name(b),
               "p_red_" + axis_name(a),
               "p_red_" + axis_name(b),
               "p_blue_" + axis_name(a),
               "p_blue_" + axis_name(b)};
  for (const auto& s : out.trace)
    t.add({s.time, s.n_i, s.n_j,
           sideband_excitation(s.populations_i, pa, Sideband::red, pa.pulse_time),
           sideband_excitation(s.populations_j, pb, Sideband::red, pb.pulse_time),
           sideband_excitation(s.populations_i, pa, Sideband::blue, pa.pulse_time),
           sideband_excitation(s.populations_j, pb, Sideband::blue, pb.pulse_time)});
  r.fitted.push_back({"transfer_fidelity", out.fidelity, 0.0, true});
  r.fitted.push_back({"swap_time_s", swap_time(rc.coupling), 0.0, true});
  return r;
}

RunOutput run_cool(const RunConfig& rc) {
  CoolingSetup setup;
  setup.modes = rc.modes;
  setup.pulse = rc.drive;
  setup.initial_nbar_primary = rc.cool.nbar_primary;
  setup.initial_nbar_secondary = rc.cool.nbar_secondary;
  setup.cutoff_primary = rc.cool.cutoff_primary;
  setup.cutoff_secondary = rc.cool.cutoff_secondary;
  const auto& c = rc.cool.schedule;
  const ProtocolResult res =
      c.placement == SwapPlacement::interleaved
          ? interleaved_cooling(setup, c, rc.trap, rc.noise)
          : single_swap_cooling(setup, c.cool_duration, c.post_cool_delay, rc.trap, rc.noise);

  RunOutput r;
  r.config_hash = res.provenance.config_hash;
  Table& t = r.tables.emplace_back(rc.prefix, Table{}).second;
  t.columns = {"step", "label", "t_s", "n_" + axis_name(rc.modes.first),
               "n_" + axis_name(rc.modes.second), "trace"};
  for (std::size_t k = 0; k < res.steps.size(); ++k) {
    const auto& s = res.steps[k];
    t.add({double(k), s.label, s.time, s.n_i, s.n_j, s.trace});
  }
  const auto& last = res.final_step();
  r.fitted.push_back({"final_n_" + axis_name(rc.modes.first), last.n_i, 0.0, true});
  r.fitted.push_back({"final_n_" + axis_name(rc.modes.second), last.n_j, 0.0, true});
  return r;
}

RunOutput run_heatrate(const RunConfig& rc) {
  const auto res = heating_rate_experiment(rc.trap, rc.noise, rc.heatrate);
  const auto* rate = res.find("heating_rate");
  const auto* n0 = res.find("initial_nbar");

  RunOutput r;
  r.config_hash = res.provenance.config_hash;
  r.fitted = res.fitted;
  Table& t = r.tables.emplace_back(rc.prefix, Table{}).second;
  const Axis a = rc.modes.first, b = rc.modes.second;
  t.columns = {"wait_s",      "n_" + axis_name(a), "n_" + axis_name(b), "p_red",
               "p_red_err",   "p_blue",            "p_blue_err",        "nbar",
               "nbar_err",    "nbar_fit",          "heating_rate",      "heating_rate_err"};
  for (std::size_t k = 0; k < res.steps.size(); ++k) {
    const auto& s = res.steps[k];
    const double w = rc.heatrate.waits[k];
    t.add({w, s.n_i, s.n_j, measured(s, "p_red"), measured(s, "p_red", true),
           measured(s, "p_blue"), measured(s, "p_blue", true), measured(s, "nbar"),
           measured(s, "nbar", true), n0->value + rate->value * w, rate->value, rate->error});
  }
  return r;
}

RunOutput run_crossing(const RunConfig& rc) {
  const double resonance =
      std::abs(rc.trap.frequency(rc.modes.first) - rc.trap.frequency(rc.modes.second));
  std::vector<double> drive;
  for (double d : rc.crossing.detunings) drive.push_back(resonance + d);
  const auto scan = avoided_crossing_scan(rc.trap, rc.drive, rc.modes, drive,
                                          rc.crossing.probe_detunings, rc.crossing.spectrum);
  const double hz = 1.0 / two_pi;

  RunOutput r;
  Table& t = r.tables.emplace_back(rc.prefix, Table{}).second;
  // drive_offset is the configured offset from |w_i - w_j|, delta the
  // model detuning of the exchange term
  t.columns = {"drive_offset_hz",   "delta_hz", "reference_splitting_hz", "peaks",
               "center_1_hz",       "center_2_hz",            "width_1_hz",
               "width_2_hz",        "separation_hz",          "fit_residual"};
  for (std::size_t k = 0; k < scan.axis.size(); ++k) {
    const auto& f = scan.peaks[k];
    // one resolved line: both centers sit on it
    const int second = f.peaks == 2 ? 1 : 0;
    t.add({rc.crossing.detunings[k] * hz, scan.axis[k] * hz, scan.reference[k] * hz, double(f.peaks), f.center[0] * hz,
           f.center[second] * hz, f.width[0] * hz, f.width[second] * hz, f.separation * hz,
           f.rms_residual});
  }
  Table& s = r.tables.emplace_back(rc.prefix + "_spectrum", Table{}).second;
  s.columns = {"drive_offset_hz", "probe_detuning_hz", "excitation", "excitation_err"};
  for (std::size_t k = 0; k < scan.axis.size(); ++k)
    for (std::size_t q = 0; q < scan.probe_axis.size(); ++q)
      s.add({rc.crossing.detunings[k] * hz, scan.probe_axis[q] * hz, scan.values(Eigen::Index(k), Eigen::Index(q)),
             scan.errors.size() ? scan.errors(Eigen::Index(k), Eigen::Index(q)) : 0.0});
  r.fitted = scan.fitted;
  return r;
}

RunOutput run_bessel(const RunConfig& rc) {
  const auto scan =
      bessel_characterization_scan(rc.trap, rc.drive, rc.bessel.amplitudes, rc.bessel.options);
  RunOutput r;
  Table& t = r.tables.emplace_back(rc.prefix, Table{}).second;
  t.columns = {"amplitude_v", "coupling_hz", "modulation_index", "carrier",
               "sideband",    "carrier_err", "sideband_err"};
  const bool errs = scan.errors.rows() == scan.values.rows();
  for (std::size_t k = 0; k < scan.axis.size(); ++k) {
    const auto row = Eigen::Index(k);
    t.add({scan.axis[k], scan.values(row, 0) / two_pi, scan.values(row, 1), scan.values(row, 2),
           scan.values(row, 3), errs ? scan.errors(row, 2) : 0.0, errs ? scan.errors(row, 3) : 0.0});
  }
  r.fitted = scan.fitted;
  return r;
}

RunOutput run_squeeze(const RunConfig& rc) {
  const auto res =
      squeeze_experiment(rc.trap, rc.drive, rc.modes, rc.squeeze.times, rc.squeeze.cutoff);
  RunOutput r;
  r.config_hash = res.provenance.config_hash;
  Table& t = r.tables.emplace_back(rc.prefix, Table{}).second;
  t.columns = {"t_s",     "gt",          "n_" + axis_name(rc.modes.first),
               "n_" + axis_name(rc.modes.second), "witness", "correlation"};
  for (const auto& s : res.steps)
    t.add({s.time, rc.coupling * s.time, s.n_i, s.n_j, measured(s, "witness"),
           measured(s, "correlation")});
  return r;
}

}  // namespace

RunOutput execute(const RunConfig& rc) {
  RunOutput r;
  switch (rc.subcommand) {
    case Subcommand::swap: r = run_swap(rc); break;
    case Subcommand::cool: r = run_cool(rc); break;
    case Subcommand::heatrate: r = run_heatrate(rc); break;
    case Subcommand::crossing: r = run_crossing(rc); break;
    case Subcommand::bessel: r = run_bessel(rc); break;
    case Subcommand::squeeze: r = run_squeeze(rc); break;
  }
  if (r.config_hash.empty()) r.config_hash = config_hash(rc.trap, rc.noise);
  return r;
}

std::string output_directory(const std::string& flag, const RunConfig& rc) {
  if (!flag.empty()) return flag;
  if (!rc.output_directory.empty()) return rc.output_directory;
  if (const char* env = std::getenv("MODECOUPLE_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

std::vector<std::string> run(const RunConfig& rc, const std::string& directory) {
  const auto start = std::chrono::steady_clock::now();
  const RunOutput out = execute(rc);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec || !fs::is_directory(directory))
    throw Error(ErrorKind::io, "cannot create output directory '" + directory + "'");

  std::vector<std::string> written;
  for (const auto& [name, table] : out.tables) {
    const auto path = (fs::path(directory) / (name + ".csv")).string();
    write_csv(path, table);
    written.push_back(path);
  }

  std::ostringstream m;
  m << "# modecouple run manifest\n"
    << "# version: " << version << "\n"
    << "# subcommand: " << to_string(rc.subcommand) << "\n"
    << "# seed: " << rc.seed << "\n"
    << "# config_hash: " << out.config_hash << "\n"
    << "# wall_time_s: " << format_number(wall) << "\n";
  for (const auto& [name, table] : out.tables)
    m << "# table: " << name << ".csv (" << table.rows.size() << " rows)\n";
  for (const auto& f : out.fitted)
    m << "# fitted: " << f.name << " = " << format_number(f.value) << " +- "
      << format_number(f.error) << (f.ok ? "" : " (failed)") << "\n";
  m << "# resolved configuration:\n" << rc.resolved;
  const auto manifest = (fs::path(directory) / (rc.prefix + "_manifest.txt")).string();
  write_file(manifest, m.str());
  written.push_back(manifest);
  return written;
}

}  // namespace modecouple::cli
