#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace modecouple {

/// Sum of Lorentzians on a constant background:
/// y = offset + sum_k amplitude_k / (1 + 4 (x - center_k)^2 / width_k^2)
struct PeakFit {
  int peaks = 0;  // 0 (failed), 1 or 2
  std::array<double, 2> center{0.0, 0.0};
  std::array<double, 2> width{0.0, 0.0};  // full width at half maximum
  std::array<double, 2> amplitude{0.0, 0.0};
  double offset = 0.0;
  /// |center_1 - center_0|, 0 for a single line.
  double separation = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  std::string message;

  double operator()(double x) const;
};

/// Local maxima of y, largest first; ties go to the lower x.
std::vector<std::size_t> local_maxima(std::span<const double> y);

/// Least-squares fit of one or two Lorentzians seeded from the largest
/// local maximum and the largest smoothed residual of a one-line fit. No
/// residual above 5% of the tallest line gives a one-line fit. Never throws
/// for bad data; failures are reported in the result.
PeakFit fit_lorentzians(std::span<const double> x, std::span<const double> y);

struct ScalarFit {
  double value = 0.0;
  double error = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  std::string message;
};

/// One-parameter least squares: minimise sum_k r_k(p)^2 over p in
/// [lo, hi], seeded by a grid search and refined with Levenberg-Marquardt.
/// residuals(p, out) fills out (size n_residuals).
ScalarFit fit_scalar(const std::function<void(double, std::vector<double>&)>& residuals,
                     std::size_t n_residuals, double lo, double hi,
                     std::size_t grid = 2000);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_error = 0.0;
  double slope_error = 0.0;
  bool ok = false;
  std::string message;
};

/// Weighted least-squares line through (x, y) with standard errors sigma.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma);

}  // namespace modecouple
