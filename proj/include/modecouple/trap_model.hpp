#pragma once

#include <array>
#include <limits>
#include <string>

#include "modecouple/envelope.hpp"

namespace modecouple {

enum class Axis { x = 0, y = 1, z = 2 };

const char* to_string(Axis a) noexcept;
Axis axis_from_char(char c);

/// Ordered pair of coupled modes. `first` is mode i of the two-mode basis.
struct ModePair {
  Axis first = Axis::x;
  Axis second = Axis::z;
};

/// Trap and ion parameters. Lengths that are infinite switch the
/// corresponding potential term off.
struct TrapConfig {
  static constexpr double none = std::numeric_limits<double>::infinity();

  double mass = 0.0;    // kg
  double charge = 0.0;  // C
  std::array<double, 3> omega{};  // rad/s, (x, y, z)
  /// Second-order expansion lengths D_ij (symmetric, metres, > 0).
  std::array<std::array<double, 3>, 3> curvature{{{none, none, none},
                                                  {none, none, none},
                                                  {none, none, none}}};
  /// Sign of each second-order term, +1 or -1.
  std::array<std::array<int, 3>, 3> curvature_sign{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};
  /// First-order expansion lengths D_1,i (metres, signed, nonzero).
  std::array<double, 3> linear{none, none, none};
  /// Direction cosines of the laser wavevector on (x, y, z).
  std::array<double, 3> laser_projection{};
  double laser_wavenumber = 0.0;  // rad/m

  double frequency(Axis a) const { return omega[static_cast<int>(a)]; }
  void set_curvature(Axis a, Axis b, double length, int sign = 1);

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Electrode drive V(t) = V0 B(t) cos(w_p t + phase).
struct DrivePulse {
  double amplitude = 0.0;  // V
  double frequency = 0.0;  // rad/s
  double phase = 0.0;      // rad
  EnvelopeKind envelope = EnvelopeKind::rectangular;
  /// Full window length. For Blackman this is the rectangular-equivalent
  /// duration divided by 0.42.
  double duration = 0.0;   // s

  Envelope window() const { return Envelope{envelope, duration, 0.0}; }
  /// Length of the rectangular pulse with the same area.
  double rectangular_equivalent() const;
  void validate() const;

  /// Pulse of given kind whose area equals a rectangle of length t_rect.
  static DrivePulse equal_area(double amplitude, double frequency,
                               EnvelopeKind kind, double t_rect,
                               double phase = 0.0);
};

/// Signed coupling rate g_ij = s q V0 / (4 m sqrt(w_i w_j) D_ij^2).
double coupling_rate(const TrapConfig& cfg, const DrivePulse& pulse,
                     ModePair modes);
/// Single-mode modulation rate q V0 / (4 m w_i D_ii^2) with sign.
double modulation_rate(const TrapConfig& cfg, const DrivePulse& pulse, Axis mode);
/// Linear drive strength q V0 / (D_1,i sqrt(2 m hbar w_i)) in rad/s.
double displacement_rate(const TrapConfig& cfg, const DrivePulse& pulse, Axis mode);

/// Full population exchange time pi / (2 g).
double swap_time(double g);

/// Drive amplitude that gives coupling g on the pair.
double amplitude_for_coupling(const TrapConfig& cfg, ModePair modes, double g);

struct DrivenMotionOptions {
  /// Minimum |w_p - w_i| accepted as off resonant, rad/s.
  double guard_band = 2.0 * 3.141592653589793 * 10e3;
};

/// Signed steady-state amplitude of mode `mode` under the linear drive force.
double driven_motion_amplitude(const TrapConfig& cfg, const DrivePulse& pulse,
                               Axis mode, const DrivenMotionOptions& opt = {});
/// |sum_i k_i A_i|, the amplitude seen along the laser direction.
double projected_driven_amplitude(const TrapConfig& cfg, const DrivePulse& pulse,
                                  const DrivenMotionOptions& opt = {});

/// Eigenvalue splitting of the one-excitation block of the detuned
/// exchange Hamiltonian, from direct diagonalisation.
double detuned_splitting(double g, double detuning);

/// Residual detuning of a difference-frequency drive,
/// (w_i - w_j) - sgn(w_i - w_j) w_p.
double difference_detuning(const TrapConfig& cfg, const DrivePulse& pulse,
                           ModePair modes);

/// Lamb-Dicke parameter k |k_i| sqrt(hbar / (2 m w_i)).
double lamb_dicke(const TrapConfig& cfg, Axis mode);

}  // namespace modecouple
