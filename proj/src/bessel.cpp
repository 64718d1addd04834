#include "modecouple/bessel.hpp"

#include <cmath>
#include <cstdlib>

#include "modecouple/errors.hpp"

namespace modecouple {

double bessel_j(int n, double x) {
  // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x)
  double sign = 1.0;
  if (n < 0) {
    n = -n;
    if (n % 2) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (n % 2) sign = -sign;
  }
  return sign * std::cyl_bessel_j(static_cast<double>(n), x);
}

double carrier_suppression(double kA, int order) {
  if (!(kA >= 0.0) || !std::isfinite(kA))
    throw ValidationError("modulation index kA must be finite and >= 0");
  return std::abs(bessel_j(order, kA));
}

}  // namespace modecouple
