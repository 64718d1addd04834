#pragma once

namespace modecouple {

/// Bessel function of the first kind J_n(x) for integer n and real x.
double bessel_j(int n, double x);

/// Relative Rabi frequency |J_n(kA)| of the n-th driven-motion sideband.
/// Throws ValidationError for kA < 0.
double carrier_suppression(double kA, int order);

}  // namespace modecouple
