#pragma once

// Shared test fixtures: a 40Ca+ ion in a surface trap.

#include <cmath>

#include "modecouple/constants.hpp"
#include "modecouple/trap_model.hpp"

namespace fixtures {

using namespace modecouple;
using namespace modecouple::constants;

inline TrapConfig ca40_trap() {
  TrapConfig cfg;
  cfg.mass = 40.0 * atomic_mass_unit;
  cfg.charge = elementary_charge;
  cfg.omega = {angular(2.6e6), angular(2.9e6), angular(1.0e6)};
  cfg.set_curvature(Axis::x, Axis::z, 300e-6);
  cfg.set_curvature(Axis::x, Axis::y, 300e-6);
  cfg.set_curvature(Axis::y, Axis::z, 300e-6);
  cfg.linear = {150e-6, 150e-6, 150e-6};
  cfg.laser_projection = {std::cos(pi / 4.0) * std::cos(9.0 * pi / 180.0),
                          std::sin(9.0 * pi / 180.0),
                          std::sin(pi / 4.0) * std::cos(9.0 * pi / 180.0)};
  cfg.laser_wavenumber = two_pi / 729e-9;
  return cfg;
}

/// Rectangular pulse with coupling g on the pair at the difference frequency.
inline DrivePulse exchange_pulse(const TrapConfig& cfg, ModePair m, double g,
                                 double duration) {
  DrivePulse p;
  p.amplitude = amplitude_for_coupling(cfg, m, g);
  p.frequency = std::abs(cfg.frequency(m.first) - cfg.frequency(m.second));
  p.duration = duration;
  return p;
}

}  // namespace fixtures

namespace fixtures {

/// Published driven-motion ratio: 497 nm of amplitude per 2 pi x 1 kHz of g_xz.
inline constexpr double published_a_per_g = 497e-9 / (2.0 * 3.141592653589793 * 1e3);

/// Bessel fixture drive frequency, off resonance from all three modes.
inline double bessel_drive_frequency() { return angular(1.7e6); }

/// Trap whose x and z first-order lengths give the published A / g_xz.
inline TrapConfig bessel_trap() {
  TrapConfig cfg = ca40_trap();
  const double wp = bessel_drive_frequency();
  const double wx = cfg.omega[0], wz = cfg.omega[2];
  const double dxz = cfg.curvature[0][2];
  // A / g = |sum_i k_i / (D1 (w_i^2 - wp^2))| * 4 sqrt(wx wz) dxz^2
  const double s = cfg.laser_projection[0] / (wx * wx - wp * wp) +
                   cfg.laser_projection[2] / (wz * wz - wp * wp);
  const double d1 = std::abs(s) * 4.0 * std::sqrt(wx * wz) * dxz * dxz / published_a_per_g;
  cfg.linear = {d1, TrapConfig::none, d1};
  return cfg;
}

}  // namespace fixtures

#include "modecouple/protocols.hpp"

namespace fixtures {

/// SWAP coupling for T_swap = 90 us.
inline double swap_coupling() { return pi / (2.0 * 90e-6); }

/// Heating and cooling: z (primary) heats fast, x slowly.
inline NoiseModel cooling_noise() {
  NoiseModel n;
  n.heating_rate = {50.0, 810.0, 1500.0};
  n.cooling_target = 0.1;
  return n;
}

inline CoolingSetup cooling_setup(const TrapConfig& cfg) {
  CoolingSetup s;
  s.modes = {Axis::z, Axis::x};
  s.pulse = swap_pulse(cfg, s.modes, swap_coupling(), EnvelopeKind::blackman);
  s.initial_nbar_primary = 0.2;
  s.initial_nbar_secondary = 6.0;
  return s;
}

inline CoolingSchedule cooling_schedule() {
  CoolingSchedule c;
  c.cycles = 8;
  c.cooling_target = 0.1;
  c.cool_duration = 200e-6;
  c.post_cool_delay = 20e-6;
  return c;
}

inline std::vector<double> heating_waits() {
  std::vector<double> w;
  for (int k = 0; k <= 20; ++k) w.push_back(k * 1e-4);
  return w;
}

inline HeatingExperiment heating_experiment(Readout r) {
  HeatingExperiment e;
  e.modes = {Axis::x, Axis::y};
  e.waits = heating_waits();
  e.readout = r;
  e.shots = 500;
  e.cool_duration = 1e-3;
  e.post_cool_delay = 20e-6;
  return e;
}

}  // namespace fixtures
