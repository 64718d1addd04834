#include "modecouple/trap_model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "modecouple/constants.hpp"
#include "modecouple/errors.hpp"

namespace modecouple {

namespace {

int idx(Axis a) { return static_cast<int>(a); }

const char* axis_name(int k) { return k == 0 ? "x" : k == 1 ? "y" : "z"; }

}  // namespace

const char* to_string(Axis a) noexcept { return axis_name(idx(a)); }

Axis axis_from_char(char c) {
  switch (c) {
    case 'x': case 'X': return Axis::x;
    case 'y': case 'Y': return Axis::y;
    case 'z': case 'Z': return Axis::z;
    default: break;
  }
  throw ValidationError(std::string("unknown axis '") + c + "'");
}

void TrapConfig::set_curvature(Axis a, Axis b, double length, int sign) {
  if (!(length > 0.0)) throw ValidationError("trap.curvature: length must be > 0");
  if (sign != 1 && sign != -1) throw ValidationError("trap.curvature: sign must be +1 or -1");
  curvature[idx(a)][idx(b)] = curvature[idx(b)][idx(a)] = length;
  curvature_sign[idx(a)][idx(b)] = curvature_sign[idx(b)][idx(a)] = sign;
}

void TrapConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("trap." + field + ": " + why);
  };
  if (!(mass > 0.0) || !std::isfinite(mass)) fail("mass", "must be > 0");
  if (!(charge > 0.0) || !std::isfinite(charge)) fail("charge", "must be > 0");
  if (!(laser_wavenumber > 0.0) || !std::isfinite(laser_wavenumber))
    fail("laser_wavenumber", "must be > 0");
  for (int k = 0; k < 3; ++k) {
    if (!(omega[k] > 0.0) || !std::isfinite(omega[k]))
      fail(std::string("omega.") + axis_name(k), "must be > 0");
    for (int l = 0; l < k; ++l)
      if (omega[k] == omega[l])
        fail("omega", std::string("modes ") + axis_name(l) + " and " +
                          axis_name(k) + " are degenerate");
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const std::string name =
          std::string("curvature.") + axis_name(a) + axis_name(b);
      if (!(curvature[a][b] > 0.0)) fail(name, "length must be > 0");
      if (curvature[a][b] != curvature[b][a]) fail(name, "must be symmetric");
      if (curvature_sign[a][b] != 1 && curvature_sign[a][b] != -1)
        fail(name, "sign must be +1 or -1");
    }
  for (int k = 0; k < 3; ++k)
    if (linear[k] == 0.0 || std::isnan(linear[k]))
      fail(std::string("linear.") + axis_name(k), "length must be nonzero");
  double norm2 = 0.0;
  for (double c : laser_projection) norm2 += c * c;
  if (norm2 > 1.0 + 1e-12) fail("laser_projection", "norm exceeds 1");
}

double DrivePulse::rectangular_equivalent() const {
  return envelope == EnvelopeKind::blackman
             ? duration * Envelope::blackman_area_fraction
             : duration;
}

void DrivePulse::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw ValidationError("drive.duration: must be > 0");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
    throw ValidationError("drive.amplitude: must be >= 0");
  if (!(frequency >= 0.0) || !std::isfinite(frequency))
    throw ValidationError("drive.frequency: must be >= 0");
}

DrivePulse DrivePulse::equal_area(double amplitude, double frequency,
                                  EnvelopeKind kind, double t_rect,
                                  double phase) {
  DrivePulse p;
  p.amplitude = amplitude;
  p.frequency = frequency;
  p.phase = phase;
  p.envelope = kind;
  p.duration = equal_area_duration(kind, t_rect);
  return p;
}

double coupling_rate(const TrapConfig& cfg, const DrivePulse& pulse,
                     ModePair modes) {
  const int i = idx(modes.first), j = idx(modes.second);
  if (i == j) {
    throw ValidationError(
        "coupling_rate needs two distinct modes; use modulation_rate for r_i^2");
  }
  const double d = cfg.curvature[i][j];
  if (!(d > 0.0)) throw ValidationError("curvature length must be > 0");
  if (std::isinf(d)) return 0.0;
  return cfg.curvature_sign[i][j] * cfg.charge * pulse.amplitude /
         (4.0 * cfg.mass * std::sqrt(cfg.omega[i] * cfg.omega[j]) * d * d);
}

double modulation_rate(const TrapConfig& cfg, const DrivePulse& pulse, Axis mode) {
  const int i = idx(mode);
  const double d = cfg.curvature[i][i];
  if (!(d > 0.0)) throw ValidationError("curvature length must be > 0");
  if (std::isinf(d)) return 0.0;
  return cfg.curvature_sign[i][i] * cfg.charge * pulse.amplitude /
         (4.0 * cfg.mass * cfg.omega[i] * d * d);
}

double displacement_rate(const TrapConfig& cfg, const DrivePulse& pulse, Axis mode) {
  const int i = idx(mode);
  const double d = cfg.linear[i];
  if (d == 0.0) throw ValidationError("linear length must be nonzero");
  if (std::isinf(d)) return 0.0;
  return cfg.charge * pulse.amplitude /
         (d * std::sqrt(2.0 * cfg.mass * constants::hbar * cfg.omega[i]));
}

double swap_time(double g) {
  if (!(g > 0.0)) throw ValidationError("swap_time needs g > 0");
  return constants::pi / (2.0 * g);
}

double amplitude_for_coupling(const TrapConfig& cfg, ModePair modes, double g) {
  DrivePulse unit;
  unit.amplitude = 1.0;
  const double per_volt = coupling_rate(cfg, unit, modes);
  if (per_volt == 0.0) throw ValidationError("pair has no curvature coupling");
  return std::abs(g / per_volt);
}

double driven_motion_amplitude(const TrapConfig& cfg, const DrivePulse& pulse,
                               Axis mode, const DrivenMotionOptions& opt) {
  const int i = idx(mode);
  const double w = cfg.omega[i];
  if (std::abs(pulse.frequency - w) < opt.guard_band) {
    std::ostringstream os;
    os << "drive frequency within guard band of mode " << to_string(mode)
       << "; linear response diverges, use full dynamics";
    throw ValidationError(os.str());
  }
  if (std::isinf(cfg.linear[i])) return 0.0;
  const double force = cfg.charge * pulse.amplitude / cfg.linear[i];
  return force / (cfg.mass * (w * w - pulse.frequency * pulse.frequency));
}

double projected_driven_amplitude(const TrapConfig& cfg, const DrivePulse& pulse,
                                  const DrivenMotionOptions& opt) {
  double a = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (cfg.laser_projection[k] == 0.0) continue;
    a += cfg.laser_projection[k] *
         driven_motion_amplitude(cfg, pulse, static_cast<Axis>(k), opt);
  }
  return std::abs(a);
}

double detuned_splitting(double g, double detuning) {
  Eigen::Matrix2d h;
  h << detuning / 2.0, g, g, -detuning / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1) - es.eigenvalues()(0);
}

double difference_detuning(const TrapConfig& cfg, const DrivePulse& pulse,
                           ModePair modes) {
  const double diff = cfg.frequency(modes.first) - cfg.frequency(modes.second);
  return diff - (diff >= 0.0 ? 1.0 : -1.0) * pulse.frequency;
}

double lamb_dicke(const TrapConfig& cfg, Axis mode) {
  const int i = idx(mode);
  return cfg.laser_wavenumber * std::abs(cfg.laser_projection[i]) *
         std::sqrt(constants::hbar / (2.0 * cfg.mass * cfg.omega[i]));
}

}  // namespace modecouple
