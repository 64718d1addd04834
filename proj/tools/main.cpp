// modecouple: run two-mode coupling experiments from a YAML configuration.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "runner.hpp"

using namespace modecouple;
using namespace modecouple::cli;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return 2;
    case ErrorKind::io: return 4;
    default: return 3;
  }
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// One line: modecouple: error kind=<kind> exit=<code> message="<text>"
int report(ErrorKind kind, const std::string& what) {
  std::string msg;
  for (char c : what) {
    if (c == '\n') c = ' ';
    if (c == '"') msg += '\\';
    msg += c;
  }
  const int code = exit_code(kind);
  std::cerr << "modecouple: error kind=" << kind_name(kind) << " exit=" << code << " message=\""
            << msg << "\"\n";
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric two-mode coupling simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version);

  std::string config_path, output_flag;
  std::vector<std::string> sets;
  long long seed = -1, shots = -1;
  bool quiet = false;

  std::vector<std::pair<CLI::App*, Subcommand>> runs;
  const std::pair<Subcommand, const char*> subs[] = {
      {Subcommand::swap, "SWAP dynamics of two thermal modes"},
      {Subcommand::cool, "interleaved or single-SWAP sympathetic cooling"},
      {Subcommand::heatrate, "heating-rate measurement with sampled sideband readout"},
      {Subcommand::crossing, "avoided-crossing sideband spectroscopy scan"},
      {Subcommand::bessel, "carrier and sideband Rabi frequencies under driven motion"},
      {Subcommand::squeeze, "two-mode squeezing from vacuum"},
  };
  for (const auto& [sub, help] : subs) {
    auto* s = app.add_subcommand(to_string(sub), help);
    s->add_option("config", config_path, "YAML configuration")->required();
    s->add_option("--set", sets, "override a key, e.g. --set drive.coupling_hz=2500");
    s->add_option("-o,--output", output_flag, "output directory");
    s->add_option("--seed", seed, "random seed");
    s->add_option("--shots", shots, "shots per point");
    s->add_flag("-q,--quiet", quiet, "do not list written files");
    runs.emplace_back(s, sub);
  }
  auto* validate = app.add_subcommand("validate", "check a configuration without running it");
  validate->add_option("config", config_path, "YAML configuration")->required();
  validate->add_option("--set", sets, "override a key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    std::vector<Override> overrides;
    for (const auto& s : sets) overrides.push_back(parse_override(s));
    if (seed >= 0) overrides.push_back({"seed", std::to_string(seed)});
    if (shots >= 0) overrides.push_back({"shots", std::to_string(shots)});

    if (validate->parsed()) {
      const auto diags = check_config(slurp(config_path), overrides);
      std::size_t errors = 0, warnings = 0;
      for (const auto& d : diags) {
        std::cout << d.str() << "\n";
        (d.level == Diagnostic::Level::error ? errors : warnings) += 1;
      }
      std::cout << errors << " errors, " << warnings << " warnings\n";
      return errors ? 2 : 0;
    }

    for (const auto& [app_sub, sub] : runs) {
      if (!app_sub->parsed()) continue;
      std::vector<Diagnostic> warnings;
      const RunConfig rc = parse_config(slurp(config_path), sub, overrides, &warnings);
      for (const auto& w : warnings) std::cerr << "modecouple: " << w.str() << "\n";
      const auto files = run(rc, output_directory(output_flag, rc));
      if (!quiet)
        for (const auto& f : files) std::cout << f << "\n";
      return 0;
    }
  } catch (const Error& e) {
    return report(e.kind(), e.what());
  } catch (const std::bad_alloc&) {
    return report(ErrorKind::dimension, "out of memory");
  } catch (const std::exception& e) {
    return report(ErrorKind::numerical, e.what());
  }
  return 2;
}
