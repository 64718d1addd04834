#include "modecouple/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace modecouple {

namespace {

double lorentz(double x, double c, double w) {
  const double u = 2.0 * (x - c) / w;
  return 1.0 / (1.0 + u * u);
}

// Parameters: offset, then (amplitude, center, width) per peak, in
// normalised x units.
struct PeakFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::vector<double> x, y;
  int peaks;

  int inputs() const { return 1 + 3 * peaks; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (std::size_t k = 0; k < x.size(); ++k) {
      double v = p(0);
      for (int m = 0; m < peaks; ++m)
        v += p(1 + 3 * m) * lorentz(x[k], p(2 + 3 * m), p(3 + 3 * m));
      f(static_cast<Eigen::Index>(k)) = v - y[k];
    }
    return 0;
  }
};

struct ScalarFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::function<void(double, std::vector<double>&)>* fn;
  std::size_t n;
  mutable std::vector<double> buf;

  int inputs() const { return 1; }
  int values() const { return static_cast<int>(n); }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    buf.assign(n, 0.0);
    (*fn)(p(0), buf);
    for (std::size_t k = 0; k < n; ++k) f(static_cast<Eigen::Index>(k)) = buf[k];
    return 0;
  }
};

bool lm_converged(int info) {
  using S = Eigen::LevenbergMarquardtSpace::Status;
  return info == S::RelativeReductionTooSmall || info == S::RelativeErrorTooSmall ||
         info == S::RelativeErrorAndReductionTooSmall || info == S::CosinusTooSmall;
}

// Full width at half maximum around a peak index, walking outwards.
double half_width(std::span<const double> x, std::span<const double> y, std::size_t at,
                  double base) {
  const double half = base + 0.5 * (y[at] - base);
  std::size_t lo = at, hi = at;
  while (lo > 0 && y[lo] > half) --lo;
  while (hi + 1 < y.size() && y[hi] > half) ++hi;
  return std::max(x[hi] - x[lo], 2.0 * (x[1] - x[0]));
}

}  // namespace

double PeakFit::operator()(double x) const {
  double v = offset;
  for (int m = 0; m < peaks; ++m) v += amplitude[m] * lorentz(x, center[m], width[m]);
  return v;
}

std::vector<std::size_t> local_maxima(std::span<const double> y) {
  std::vector<std::size_t> out;
  const std::size_t n = y.size();
  for (std::size_t k = 0; k < n; ++k) {
    const bool left = k == 0 || y[k] > y[k - 1];
    const bool right = k + 1 == n || y[k] >= y[k + 1];
    if (left && right && n > 1) out.push_back(k);
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
  return out;
}

namespace {

// Levenberg-Marquardt from the seed p; fills out and returns the status.
int run_peak_fit(std::span<const double> x, std::span<const double> y, int peaks,
                 Eigen::VectorXd p, PeakFit& out) {
  const double x0 = x.front(), scale = x.back() - x.front();
  PeakFunctor f;
  f.peaks = peaks;
  for (std::size_t k = 0; k < x.size(); ++k) {
    f.x.push_back((x[k] - x0) / scale);
    f.y.push_back(y[k]);
  }
  for (int m = 0; m < peaks; ++m) {
    p(2 + 3 * m) = (p(2 + 3 * m) - x0) / scale;
    p(3 + 3 * m) /= scale;
  }
  Eigen::NumericalDiff<PeakFunctor> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<PeakFunctor>> lm(nd);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;
  const int info = lm.minimize(p);

  out = PeakFit{};
  out.peaks = peaks;
  out.offset = p(0);
  for (int m = 0; m < peaks; ++m) {
    out.amplitude[m] = p(1 + 3 * m);
    out.center[m] = x0 + scale * p(2 + 3 * m);
    out.width[m] = std::abs(scale * p(3 + 3 * m));
  }
  if (peaks == 2 && out.center[1] < out.center[0]) {
    std::swap(out.center[0], out.center[1]);
    std::swap(out.width[0], out.width[1]);
    std::swap(out.amplitude[0], out.amplitude[1]);
  }
  out.separation = peaks == 2 ? out.center[1] - out.center[0] : 0.0;
  Eigen::VectorXd r(f.values());
  f(p, r);
  out.rms_residual = std::sqrt(r.squaredNorm() / double(r.size()));
  out.converged = lm_converged(info);
  for (int m = 0; m < peaks; ++m) {
    if (out.center[m] < x.front() || out.center[m] > x.back() || !(out.amplitude[m] > 0.0) ||
        !std::isfinite(out.width[m])) {
      out.converged = false;
      out.message = "peak left the scan window";
    }
  }
  if (!lm_converged(info))
    out.message = "least squares did not converge (status " + std::to_string(info) + ")";
  return info;
}

}  // namespace

PeakFit fit_lorentzians(std::span<const double> x, std::span<const double> y) {
  PeakFit out;
  if (x.size() != y.size() || x.size() < 8) {
    out.message = "need at least 8 points";
    return out;
  }
  if (!(x.back() - x.front() > 0.0)) {
    out.message = "x must increase";
    return out;
  }
  const double base = *std::min_element(y.begin(), y.end());
  const auto maxima = local_maxima(y);
  const double top = maxima.empty() ? base : y[maxima.front()];
  if (maxima.empty() || !(top > base)) {
    out.message = "no peak found";
    return out;
  }
  const std::size_t at = maxima.front();
  Eigen::VectorXd p1(4);
  p1 << base, top - base, x[at], half_width(x, y, at, base);
  PeakFit one;
  run_peak_fit(x, y, 1, p1, one);
  if (!one.converged) one.center[0] = x[at], one.width[0] = p1(3), one.amplitude[0] = top - base;

  // Second line: largest smoothed residual of the one-line fit beyond one
  // width of the first, ignored below 5% of the tallest line. Smoothing
  // over a quarter width keeps shot noise on the flanks from seeding it.
  const double dx = (x.back() - x.front()) / double(x.size() - 1);
  const auto half = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(0.125 * one.width[0] / dx)));
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> resid(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) resid[k] = y[k] - one(x[k]);
  double best = -INFINITY;
  std::ptrdiff_t second = -1;
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    if (std::abs(x[k] - one.center[0]) < one.width[0]) continue;
    double s = 0.0;
    int cnt = 0;
    for (std::ptrdiff_t q = std::max<std::ptrdiff_t>(0, k - half); q <= std::min(n - 1, k + half);
         ++q, ++cnt)
      s += resid[q];
    s /= cnt;
    if (s > best) best = s, second = k;
  }
  if (second < 0 || best < 0.05 * (top - base)) {
    if (!one.converged && one.message.empty()) one.message = "one-line fit failed";
    return one;
  }
  Eigen::VectorXd p2(7);
  p2 << one.offset, one.amplitude[0], one.center[0], one.width[0], best, x[second],
      std::min(one.width[0], std::abs(x[second] - one.center[0]));
  run_peak_fit(x, y, 2, p2, out);
  return out;
}

ScalarFit fit_scalar(const std::function<void(double, std::vector<double>&)>& residuals,
                     std::size_t n_residuals, double lo, double hi, std::size_t grid) {
  ScalarFit out;
  if (!(hi > lo) || n_residuals == 0 || grid < 2) {
    out.message = "bad fit bounds";
    return out;
  }
  std::vector<double> r(n_residuals);
  auto cost = [&](double v) {
    residuals(v, r);
    double s = 0.0;
    for (double e : r) s += e * e;
    return s;
  };
  double best = lo, best_cost = cost(lo);
  for (std::size_t k = 1; k < grid; ++k) {
    const double v = lo + (hi - lo) * double(k) / double(grid - 1);
    const double c = cost(v);
    if (c < best_cost) {
      best_cost = c;
      best = v;
    }
  }
  ScalarFunctor f{&residuals, n_residuals, {}};
  Eigen::NumericalDiff<ScalarFunctor> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ScalarFunctor>> lm(nd);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  Eigen::VectorXd p(1);
  p(0) = best;
  const int info = lm.minimize(p);
  out.value = p(0);
  out.converged = lm_converged(info) || info == Eigen::LevenbergMarquardtSpace::Status::XtolTooSmall ||
                  info == Eigen::LevenbergMarquardtSpace::Status::FtolTooSmall;
  if (!out.converged) out.message = "least squares did not converge";

  // standard error from the local Jacobian
  const double h = 1e-6 * std::max(std::abs(out.value), (hi - lo) * 1e-3);
  std::vector<double> rp(n_residuals), rm(n_residuals);
  residuals(out.value + h, rp);
  residuals(out.value - h, rm);
  residuals(out.value, r);
  double jtj = 0.0, rss = 0.0;
  for (std::size_t k = 0; k < n_residuals; ++k) {
    const double d = (rp[k] - rm[k]) / (2.0 * h);
    jtj += d * d;
    rss += r[k] * r[k];
  }
  out.rms_residual = std::sqrt(rss / double(n_residuals));
  const double dof = n_residuals > 1 ? double(n_residuals - 1) : 1.0;
  out.error = jtj > 0.0 ? std::sqrt(rss / dof / jtj) : INFINITY;
  return out;
}

LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma) {
  LineFit out;
  if (x.size() != y.size() || x.size() != sigma.size() || x.size() < 3) {
    out.message = "need at least 3 points of equal length";
    return out;
  }
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(sigma[k] > 0.0) || !std::isfinite(sigma[k]) || !std::isfinite(y[k])) {
      out.message = "invalid point " + std::to_string(k);
      return out;
    }
    const double w = 1.0 / (sigma[k] * sigma[k]);
    s += w;
    sx += w * x[k];
    sy += w * y[k];
    sxx += w * x[k] * x[k];
    sxy += w * x[k] * y[k];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0.0)) {
    out.message = "degenerate abscissae";
    return out;
  }
  out.slope = (s * sxy - sx * sy) / det;
  out.intercept = (sxx * sy - sx * sxy) / det;
  out.slope_error = std::sqrt(s / det);
  out.intercept_error = std::sqrt(sxx / det);
  out.ok = true;
  return out;
}

}  // namespace modecouple
