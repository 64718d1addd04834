#pragma once

#include <string>
#include <vector>

#include "modecouple/envelope.hpp"
#include "modecouple/fock.hpp"
#include "modecouple/hamiltonian.hpp"
#include "modecouple/trap_model.hpp"

namespace modecouple {

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

/// Per-mode heating rates (quanta/s, indexed by axis) and the occupation
/// the cooling channel prepares.
struct NoiseModel {
  std::array<double, 3> heating_rate{0.0, 0.0, 0.0};
  double cooling_target = 0.0;

  double rate(Axis a) const { return heating_rate[static_cast<int>(a)]; }
  void validate() const;
};

enum class Propagation {
  automatic,  // exact sector propagation when available, else Magnus
  magnus,     // fourth-order commutator-free Magnus with Taylor exponentials
};

struct EvolutionOptions {
  Propagation method = Propagation::automatic;
  /// Step bound ||H|| dt.
  double max_phase = 0.1;
  /// Steps per period of the fastest tone in H(t).
  int steps_per_period = 40;
  /// Overrides the step rules when > 0 (convergence studies).
  long fixed_steps = 0;
  /// Relative truncation of the Taylor series for exp(-i A) v.
  double taylor_tolerance = 1e-15;
  /// Observables are recorded at this many evenly spaced times
  /// (endpoints included). Values below 2 record only the endpoints.
  std::size_t samples = 2;
  /// Largest tolerated norm or trace drift before the run is failed.
  double drift_limit = 1e-7;
  /// Hermiticity defect that aborts the run.
  double hermiticity_limit = 1e-10;
};

struct EvolutionReport {
  TwoModeState final_state;
  std::vector<double> times;
  std::vector<double> n_i;
  std::vector<double> n_j;
  double max_norm_drift = 0.0;
  double max_hermiticity_defect = 0.0;  // Lindblad only
  double min_eigenvalue = 0.0;          // Lindblad only, when checked
  long steps = 0;
  bool ok = true;
  std::string message;
};

/// Closed evolution of a pure state. Throws ValidationError when H(t) is
/// not Hermitian.
EvolutionReport evolve_schrodinger(const TwoModeState& state, const Hamiltonian& h,
                                   TimeSpan span, const EvolutionOptions& opt = {});

/// Closed evolution of a mixed state: sector propagation when H conserves
/// a charge, otherwise an ensemble of pure components evolved in parallel.
EvolutionReport evolve_closed_mixed(const TwoModeState& state, const Hamiltonian& h,
                                    TimeSpan span, const EvolutionOptions& opt = {});

/// Dissipation channel rate * D[L] with L a banded operator on one mode.
struct LindbladChannel {
  Mode mode = Mode::i;
  BandFactor op;
  double rate = 0.0;
};

/// L = a and L = a^dagger, each at rate n_dot: d<n>/dt = n_dot.
std::vector<LindbladChannel> heating_channels(Mode mode, ModeDim dim, double n_dot);
/// L = a at rate gamma: <n> decays as exp(-gamma t).
LindbladChannel damping_channel(Mode mode, ModeDim dim, double gamma);

struct LindbladOptions {
  /// Step bound ||H|| dt.
  double max_phase = 0.05;
  /// Step bound on (largest decay rate) dt.
  double dissipative_step = 0.2;
  int steps_per_period = 40;
  long fixed_steps = 0;
  std::size_t samples = 2;
  double drift_limit = 1e-7;
  /// Eigenvalue check is skipped above this dimension.
  std::size_t positivity_check_max_dim = 1600;
  double positivity_limit = -1e-6;
};

/// Fixed-step RK4 Lindblad evolution of a density matrix.
EvolutionReport evolve_lindblad(const TwoModeState& state, const Hamiltonian& h,
                                const std::vector<LindbladChannel>& channels,
                                TimeSpan span, const LindbladOptions& opt = {});

/// Electrode voltage V(t) = V0 B(t) cos(w_p t + phase).
class DriveSignal {
 public:
  explicit DriveSignal(const DrivePulse& pulse);

  double envelope(double t) const { return pulse_.amplitude * window_(t); }
  double operator()(double t) const;
  /// Integral of V0 B(t) over the pulse.
  double area() const { return pulse_.amplitude * window_.area(); }
  double duration() const { return window_.duration; }

 private:
  DrivePulse pulse_;
  Envelope window_;
};

DriveSignal apply_envelope(const DrivePulse& pulse);

enum class ResidualMethod {
  coherent,  // exact coherent amplitude by quadrature of the drive
  fock,      // Schrodinger evolution in a truncated Fock space
};

struct ResidualOptions {
  ResidualMethod method = ResidualMethod::coherent;
  /// Fock method only.
  std::size_t cutoff = 30;
  EvolutionOptions evolution{};
  /// Top-level population above this signals an undersized cutoff.
  double truncation_limit = 1e-8;
};

/// Mean occupation left in `mode` after the pulse's linear drive acts on
/// the ground state. A linear drive leaves a coherent state, so the
/// coherent method is exact at any amplitude.
double residual_excitation(const TrapConfig& cfg, const DrivePulse& pulse,
                           Axis mode, const ResidualOptions& opt = {});

struct SqueezeObservables {
  double n_i = 0.0;
  double n_j = 0.0;
  cplx correlation;          // <a_i a_j>
  double top_population = 0.0;
  TwoModeState state;
};

/// Vacuum evolved for time t under g (a_i^dag a_j^dag e^{-i phase} + h.c.).
SqueezeObservables squeeze_evolution(double g, double t, std::size_t cutoff,
                                     double phase = 0.0,
                                     double truncation_limit = 1e-8);

/// Variance of X_- = (X_i - X_j)/sqrt(2) with X = (e^{-i theta} a + h.c.)/sqrt(2).
/// Vacuum gives 1/2.
double joint_quadrature_variance(const TwoModeState& state, double theta);

/// Quadrature angle that reveals the squeezing made by a sum-frequency
/// drive with the given phase.
double squeezing_angle(double drive_phase);

}  // namespace modecouple
