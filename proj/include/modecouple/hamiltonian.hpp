#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "modecouple/envelope.hpp"
#include "modecouple/fock.hpp"
#include "modecouple/kernels.hpp"
#include "modecouple/trap_model.hpp"

namespace modecouple {

/// Single-mode operator with one nonzero diagonal band:
/// A[n + offset, n] = values[n].
struct BandFactor {
  int offset = 0;
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double max_abs() const;
  Matrix dense() const;

  static BandFactor identity(ModeDim d);
  static BandFactor annihilate(ModeDim d);
  static BandFactor create(ModeDim d);
  static BandFactor number(ModeDim d);
  /// a^2 and (a^dagger)^2
  static BandFactor annihilate_squared(ModeDim d);
  static BandFactor create_squared(ModeDim d);
};

/// amplitude * exp(i frequency t)
struct Tone {
  cplx amplitude;
  double frequency = 0.0;
};

/// envelope(t) * sum(tones) * (on_i (x) on_j). Hamiltonians are stored
/// as H / hbar in rad/s.
struct Term {
  std::vector<Tone> tones;
  std::optional<Envelope> envelope;
  BandFactor on_i;
  BandFactor on_j;

  cplx coefficient(double t) const;
  double max_coefficient() const;
};

/// Generator G and common real profile f such that H(t) = f(t) G.
struct SingleProfile {
  std::vector<cplx> weights;        // per term
  std::optional<Envelope> envelope; // f = envelope, or 1 when empty
  /// Integral of f over [t0, t1].
  double integral(double t0, double t1) const {
    return envelope ? envelope->integral(t0, t1) : t1 - t0;
  }
};

class Hamiltonian {
 public:
  Hamiltonian(ModeDim di, ModeDim dj) : di_(di), dj_(dj) {}

  ModeDim dim_i() const { return di_; }
  ModeDim dim_j() const { return dj_; }
  std::size_t size() const { return di_.cutoff * dj_.cutoff; }
  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add(Term term);

  Matrix dense(double t) const;
  /// y = H(t) x with the parallel kernel.
  void apply(double t, const Vector& x, Vector& y) const;
  /// Kernel views of the terms with coefficients evaluated at t.
  std::vector<kernels::BandTerm> band_terms(double t) const;
  /// Kernel views with caller-supplied coefficients (one per term).
  std::vector<kernels::BandTerm> band_terms(const std::vector<cplx>& coefs) const;

  /// Upper bound on the operator norm over all times.
  double norm_bound() const;
  /// Largest |frequency| among the tones (0 if static).
  double max_frequency() const;
  /// s in {+1, -1} such that n_i + s n_j is conserved, if any.
  std::optional<int> conserved_sign() const;
  /// Present when all terms share one real time profile on [t0, t1].
  std::optional<SingleProfile> single_profile(double t0, double t1) const;
  /// Relative deviation of H(t) from Hermiticity, probed with random vectors.
  double hermiticity_defect(double t) const;

 private:
  ModeDim di_, dj_;
  std::vector<Term> terms_;
};

enum class FrameKind { full_lab_interaction, rwa_difference, rwa_sum, rwa_detuned };

struct Frame {
  FrameKind kind = FrameKind::rwa_difference;
  double detuning = 0.0;  // rad/s, rwa_detuned only

  static Frame full() { return {FrameKind::full_lab_interaction, 0.0}; }
  static Frame difference() { return {FrameKind::rwa_difference, 0.0}; }
  static Frame sum() { return {FrameKind::rwa_sum, 0.0}; }
  static Frame detuned(double delta) { return {FrameKind::rwa_detuned, delta}; }
};

/// Parse "full", "rwa_difference", "rwa_sum" or "rwa_detuned".
FrameKind frame_kind_from_string(std::string_view name);

struct HamiltonianOptions {
  ModeDim dim_i{2};
  ModeDim dim_j{2};
  bool cross_terms = true;
  /// Full frame only: r_i^2 modulation of each mode.
  bool single_mode_terms = false;
  /// Full frame only: linear drive displacement of each mode.
  bool linear_terms = false;
  /// Ignore the pulse window (continuous drive).
  bool continuous_wave = false;
};

Hamiltonian build_hamiltonian(const TrapConfig& cfg, const DrivePulse& pulse,
                              ModePair modes, Frame frame,
                              const HamiltonianOptions& opt);

/// Two-mode Hamiltonian with only the linear drive on mode i.
Hamiltonian displacement_hamiltonian(const TrapConfig& cfg, const DrivePulse& pulse,
                                     Axis mode, ModeDim dim);

}  // namespace modecouple
