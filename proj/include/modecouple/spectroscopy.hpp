#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "modecouple/fitting.hpp"
#include "modecouple/fock.hpp"
#include "modecouple/trap_model.hpp"

namespace modecouple {

enum class Sideband { red, blue, carrier };

const char* to_string(Sideband s) noexcept;
Sideband sideband_from_string(const std::string& name);

/// Laser addressing one motional mode of the S-D transition.
struct LaserProbe {
  double rabi_frequency = 0.0;                // bare carrier Rabi frequency, rad/s
  std::array<double, 3> lamb_dicke{};          // eta per axis (x, y, z)
  Axis mode = Axis::x;                         // mode whose sidebands are probed
  double detuning = 0.0;                       // rad/s from the addressed line
  double pulse_time = 0.0;                     // s
  /// Contrast decay time of the oscillating part, infinity for none.
  double coherence_time = std::numeric_limits<double>::infinity();

  double eta() const { return lamb_dicke[static_cast<int>(mode)]; }
  /// Throws ValidationError outside the Lamb-Dicke regime (eta >= 0.3).
  void validate() const;

  /// Probe with eta taken from the trap geometry.
  static LaserProbe from_trap(const TrapConfig& cfg, Axis mode, double rabi_frequency,
                              double pulse_time);
};

/// Rabi frequency of the red, blue or carrier transition starting in |n>.
double sideband_rabi_frequency(const LaserProbe& probe, Sideband sb, std::size_t n);

/// Excitation probability after a pulse of length t on a motional
/// distribution p_n.
double sideband_excitation(const RealVector& populations, const LaserProbe& probe,
                           Sideband sb, double t);

struct NbarEstimate {
  double value = 0.0;
  double error = 0.0;
  bool ok = false;
  std::string message;
};

/// Sideband-ratio thermometry n = R / (1 - R), R = P_red / P_blue.
/// shots = 0 means exact probabilities (zero error). P_red >= P_blue gives
/// ok = false.
NbarEstimate estimate_nbar(double p_red, double p_blue, std::size_t shots = 0);

struct FittedValue {
  std::string name;
  double value = 0.0;
  double error = 0.0;
  bool ok = false;
};

struct ScanResult {
  std::string axis_name;
  std::vector<double> axis;
  /// Second axis (laser detuning) for spectra; empty otherwise.
  std::string probe_name;
  std::vector<double> probe_axis;
  /// Value column names when there is no probe axis.
  std::vector<std::string> series;
  /// Rows follow axis; columns follow probe_axis or series. Values are
  /// excitation probabilities or relative Rabi frequencies, all in [0, 1].
  Eigen::MatrixXd values;
  Eigen::MatrixXd errors;
  /// Line fits per axis point (spectra only).
  std::vector<PeakFit> peaks;
  /// Model prediction per axis point (spectra: eigenvalue splitting).
  std::vector<double> reference;
  std::vector<FittedValue> fitted;
  std::size_t shots = 0;
  std::uint64_t seed = 0;

  const FittedValue* find(const std::string& name) const;
};

/// Independent random stream for scan point `index`.
std::mt19937_64 point_rng(std::uint64_t seed, std::uint64_t index);

/// Binomial estimate of probability p from `shots` draws; shots = 0 returns p.
double sample_probability(double p, std::size_t shots, std::mt19937_64& rng);

struct SpectrumOptions {
  double linewidth = 2.0 * 3.141592653589793 * 1e3;  // Lorentzian FWHM, rad/s
  double contrast = 0.5;                             // peak excitation
  std::size_t shots = 0;
  std::uint64_t seed = 1;
  /// Sideband of mode i that is scanned.
  Sideband sideband = Sideband::blue;
  /// Occupations of the two modes in the probed state.
  double nbar_i = 0.0;
  double nbar_j = 0.0;
};

/// Sideband spectrum of mode i dressed by a continuous exchange drive
/// at each drive frequency. Probe detunings are relative to the bare
/// sideband of mode i. Each spectrum is fitted with two Lorentzians.
ScanResult avoided_crossing_scan(const TrapConfig& cfg, const DrivePulse& pulse,
                                 ModePair modes, const std::vector<double>& drive_frequencies,
                                 const std::vector<double>& probe_detunings,
                                 const SpectrumOptions& opt = {});

struct BesselScanOptions {
  ModePair coupling{Axis::x, Axis::z};  // pair whose g sets the slope unit
  /// Relative Gaussian noise on each measured Rabi frequency.
  double rabi_noise = 0.0;
  std::uint64_t seed = 1;
};

/// Carrier and first driven-motion sideband Rabi frequencies relative to
/// the bare carrier for each drive amplitude, with a fit of A / g.
ScanResult bessel_characterization_scan(const TrapConfig& cfg, const DrivePulse& pulse,
                                        const std::vector<double>& amplitudes,
                                        const BesselScanOptions& opt = {});

}  // namespace modecouple
