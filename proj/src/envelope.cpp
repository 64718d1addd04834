#include "modecouple/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "modecouple/constants.hpp"

namespace modecouple {

const char* to_string(EnvelopeKind kind) noexcept {
  return kind == EnvelopeKind::blackman ? "blackman" : "rectangular";
}

double Envelope::operator()(double t) const {
  const double u = t - start;
  if (u < 0.0 || u > duration) return 0.0;
  if (kind == EnvelopeKind::rectangular) return 1.0;
  const double a = blackman_alpha;
  const double x = constants::two_pi * u / duration;
  return (1.0 - a) / 2.0 - 0.5 * std::cos(x) + 0.5 * a * std::cos(2.0 * x);
}

double Envelope::integral(double t0, double t1) const {
  const double lo = std::clamp(t0 - start, 0.0, duration);
  const double hi = std::clamp(t1 - start, 0.0, duration);
  double sign = 1.0;
  double a0 = lo, a1 = hi;
  if (t1 < t0) {
    sign = -1.0;
    std::swap(a0, a1);
  }
  if (kind == EnvelopeKind::rectangular) return sign * (a1 - a0);
  const double a = blackman_alpha;
  const double w = constants::two_pi / duration;
  auto prim = [&](double u) {
    return (1.0 - a) / 2.0 * u - 0.5 * std::sin(w * u) / w +
           0.25 * a * std::sin(2.0 * w * u) / w;
  };
  return sign * (prim(a1) - prim(a0));
}

double equal_area_duration(EnvelopeKind kind, double t_rect) {
  return kind == EnvelopeKind::blackman
             ? t_rect / Envelope::blackman_area_fraction
             : t_rect;
}

}  // namespace modecouple
