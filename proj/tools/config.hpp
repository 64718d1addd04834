#pragma once

// Run configuration for the modecouple command-line tool.
//
// YAML with nested sections. Keys ending in _hz are frequencies in Hz
// (rates for couplings and linewidths) and are stored in rad/s. Unknown
// keys are rejected. See README.md for the full schema.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modecouple/errors.hpp"
#include "modecouple/protocols.hpp"

namespace modecouple::cli {

enum class Subcommand { swap, cool, heatrate, crossing, bessel, squeeze };

const char* to_string(Subcommand s) noexcept;
Subcommand subcommand_from_string(const std::string& name);

/// One problem found while reading or checking a configuration.
struct Diagnostic {
  enum class Level { error, warning };
  Level level = Level::error;
  std::string path;  // dotted key path, e.g. trap.mass_amu
  std::string message;

  std::string str() const;
};

/// Configuration rejected; carries every diagnostic found.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

struct SwapParams {
  double nbar_i = 0.2;
  double nbar_j = 6.0;
  std::size_t cutoff_i = 0;  // 0 picks from the occupation
  std::size_t cutoff_j = 0;
  bool full_frame = false;
  std::size_t samples = 91;
};

struct CoolParams {
  CoolingSchedule schedule;
  double nbar_primary = 0.2;
  double nbar_secondary = 6.0;
  std::size_t cutoff_primary = 0;
  std::size_t cutoff_secondary = 0;
};

struct CrossingParams {
  std::vector<double> detunings;        // drive detuning from |w_i - w_j|, rad/s
  std::vector<double> probe_detunings;  // rad/s
  SpectrumOptions spectrum;
};

struct BesselParams {
  std::vector<double> amplitudes;  // V
  BesselScanOptions options;
};

struct SqueezeParams {
  std::vector<double> times;  // s
  std::size_t cutoff = 0;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::swap;
  TrapConfig trap;
  ModePair modes{Axis::z, Axis::x};
  /// Resolved drive: amplitude from coupling_hz when given, default
  /// frequency and envelope per subcommand.
  DrivePulse drive;
  double coupling = 0.0;  // |g| of the drive on `modes`, rad/s
  NoiseModel noise;
  LaserProbe probe;  // lamb_dicke from the trap; pulse_time 0 means pulse_area / (Omega eta)
  double pulse_area = 0.5 * 3.141592653589793;

  SwapParams swap;
  CoolParams cool;
  HeatingExperiment heatrate;
  CrossingParams crossing;
  BesselParams bessel;
  SqueezeParams squeeze;

  std::uint64_t seed = 1;
  std::size_t shots = 500;
  std::string output_directory;  // empty: MODECOUPLE_OUTPUT_DIR, then "."
  std::string prefix;            // file name stem, default the subcommand

  /// Configuration after overrides and defaults, as YAML.
  std::string resolved;

  /// Probe pulse length for a sideband of `mode`.
  double probe_time(Axis mode) const;
};

/// Parsed "path.to.key=value" override.
struct Override {
  std::string path;
  std::string value;  // YAML scalar or flow text
};

Override parse_override(const std::string& text);

/// Read, apply overrides, resolve defaults and validate. Throws
/// ConfigError on any error; `warnings` receives advisories.
RunConfig load_config(const std::string& path, Subcommand sub,
                      const std::vector<Override>& overrides = {},
                      std::vector<Diagnostic>* warnings = nullptr);
RunConfig parse_config(const std::string& yaml_text, Subcommand sub,
                       const std::vector<Override>& overrides = {},
                       std::vector<Diagnostic>* warnings = nullptr);

/// All diagnostics for a configuration without running anything. The
/// subcommand comes from experiment.protocol.
std::vector<Diagnostic> check_config(const std::string& yaml_text,
                                     const std::vector<Override>& overrides = {});

}  // namespace modecouple::cli
