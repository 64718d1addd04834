#pragma once

// Scripted experiments: SWAP, sympathetic cooling, heating-rate readout
// and two-mode squeezing.

#include <cstdint>
#include <string>
#include <vector>

#include "modecouple/dynamics.hpp"
#include "modecouple/sectors.hpp"
#include "modecouple/spectroscopy.hpp"

namespace modecouple {

/// State of the two modes after one protocol step.
struct Snapshot {
  std::string label;
  double time = 0.0;  // protocol clock, s
  double n_i = 0.0;
  double n_j = 0.0;
  RealVector populations_i;
  RealVector populations_j;
  double trace = 1.0;
  /// Simulated measurements taken at this step.
  std::vector<FittedValue> measured;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct ProtocolResult {
  std::string protocol;
  ModePair modes;
  std::vector<Snapshot> steps;
  std::vector<FittedValue> fitted;
  Provenance provenance;

  const FittedValue* find(const std::string& name) const;
  const Snapshot& final_step() const { return steps.back(); }
};

/// FNV-1a digest of the physical inputs, 16 hex digits.
std::string config_hash(const TrapConfig& cfg, const NoiseModel& noise);

/// Blackman for pairs involving z, rectangular for xy.
EnvelopeKind default_envelope(ModePair modes);

/// SWAP pulse at |w_i - w_j| + frequency_offset with coupling g and
/// rectangular-equivalent length pi / (2g).
DrivePulse swap_pulse(const TrapConfig& cfg, ModePair modes, double g, EnvelopeKind kind,
                      double frequency_offset = 0.0);

/// RWA frame for an exchange pulse, detuned when the pulse is off resonance.
Frame exchange_frame(const TrapConfig& cfg, const DrivePulse& pulse, ModePair modes);

/// 1 - |n_i(final) - n_j(initial)| / max(n_j(initial), 1)
double transfer_fidelity(double n_i_final, double n_j_initial);

/// Cutoff whose thermal tail beyond the last level is below `tail`.
std::size_t protocol_cutoff(double n_bar, double tail = 1e-7);

struct SwapOptions {
  bool full_frame = false;
  /// Snapshots at this many evenly spaced times over the pulse.
  std::size_t samples = 2;
  EvolutionOptions evolution{};
};

struct SwapOutcome {
  TwoModeState state;
  double fidelity = 0.0;
  std::vector<Snapshot> trace;
};

/// Evolve a two-mode state through the pulse window.
SwapOutcome swap(const TwoModeState& state, const TrapConfig& cfg, const DrivePulse& pulse,
                 ModePair modes, const SwapOptions& opt = {});

enum class SwapPlacement { interleaved, single_final };

const char* to_string(SwapPlacement p) noexcept;
SwapPlacement swap_placement_from_string(const std::string& name);

struct CoolingSchedule {
  int cycles = 1;
  double cooling_target = 0.0;  // n of the state left by the cooling channel
  SwapPlacement placement = SwapPlacement::interleaved;
  double cool_duration = 0.0;    // s per cycle
  double post_cool_delay = 0.0;  // s between cooling and the next pulse

  void validate() const;
};

/// Mode pair and pulse shared by the cooling protocols. modes.first is
/// the primary (laser cooled) mode.
struct CoolingSetup {
  ModePair modes{Axis::z, Axis::x};
  DrivePulse pulse;
  double initial_nbar_primary = 0.0;
  double initial_nbar_secondary = 0.0;
  /// Hilbert space cutoffs, 0 picks them from the occupations.
  std::size_t cutoff_primary = 0;
  std::size_t cutoff_secondary = 0;
};

/// Cool the primary, SWAP, repeat. The last cycle ends with cooling.
/// Heating from noise acts throughout.
ProtocolResult interleaved_cooling(const CoolingSetup& setup, const CoolingSchedule& schedule,
                                   const TrapConfig& cfg, const NoiseModel& noise);

/// Cool the primary for cool_duration, wait post_cool_delay, one SWAP.
ProtocolResult single_swap_cooling(const CoolingSetup& setup, double cool_duration,
                                   double post_cool_delay, const TrapConfig& cfg,
                                   const NoiseModel& noise);

enum class Readout { direct_y, double_swap_via_x };

const char* to_string(Readout r) noexcept;
Readout readout_from_string(const std::string& name);

/// Heating measurement on the secondary mode (modes.second) of an
/// exchange pair whose primary (modes.first) has a fast sideband.
/// direct_y probes the secondary; double_swap_via_x swaps it back into
/// the primary and probes that.
struct HeatingExperiment {
  ModePair modes{Axis::x, Axis::y};
  std::vector<double> waits;  // s
  Readout readout = Readout::double_swap_via_x;
  std::size_t shots = 500;
  std::uint64_t seed = 1;
  double coupling = 2.0 * 3.141592653589793 * 2.5e3;  // g of the SWAP pulses, rad/s
  double rabi_frequency = 2.0 * 3.141592653589793 * 100e3;
  /// Sideband pulse length is pulse_area / (rabi_frequency * eta).
  double pulse_area = 0.5 * 3.141592653589793;
  double coherence_time = 500e-6;
  double initial_nbar_primary = 6.0;
  double initial_nbar_secondary = 6.0;
  double cool_duration = 0.0;
  double post_cool_delay = 0.0;

  void validate() const;
};

/// Exact red and blue sideband probabilities per wait time.
struct HeatingData {
  Readout readout = Readout::double_swap_via_x;
  LaserProbe probe;
  std::vector<double> waits;
  std::vector<double> p_red;
  std::vector<double> p_blue;
  std::vector<Snapshot> steps;
};

HeatingData heating_probabilities(const TrapConfig& cfg, const NoiseModel& noise,
                                  const HeatingExperiment& exp);

struct HeatingFit {
  double initial_nbar = 0.0;
  double initial_error = 0.0;
  double rate = 0.0;  // quanta/s
  double rate_error = 0.0;
  int iterations = 0;
  bool ok = false;
  std::string message;
};

/// Maximum-likelihood fit of n(t) = n0 + rate t to binomial sideband
/// counts, thermal distribution assumed. Throws NumericalError when no
/// point yields a sideband-ratio estimate.
HeatingFit fit_heating_line(const LaserProbe& probe, const std::vector<double>& waits,
                            const std::vector<double>& red, const std::vector<double>& blue,
                            std::size_t shots);

/// Draw shots from the exact probabilities and fit.
ProtocolResult sample_heating(const HeatingData& data, std::size_t shots, std::uint64_t seed);

ProtocolResult heating_rate_experiment(const TrapConfig& cfg, const NoiseModel& noise,
                                       const HeatingExperiment& exp);

/// Two-mode squeezing from vacuum under a sum-frequency pulse, evaluated
/// on a grid of drive times. Reports occupations and the joint quadrature
/// variance ("witness", 1/2 for vacuum).
ProtocolResult squeeze_experiment(const TrapConfig& cfg, const DrivePulse& pulse,
                                  ModePair modes, const std::vector<double>& times,
                                  std::size_t cutoff = 0);

}  // namespace modecouple
