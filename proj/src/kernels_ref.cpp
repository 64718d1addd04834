#include "modecouple/kernels.hpp"

#include <algorithm>

namespace modecouple::kernels::ref {

namespace {

// Accumulate one banded term into y.
void accumulate(const BandTerm& t, Shape s, const cplx* x, cplx* y) {
  const auto di = static_cast<long>(s.dim_i);
  const auto dj = static_cast<long>(s.dim_j);
  for (long mi = 0; mi < di; ++mi) {
    const long ni = mi - t.offset_i;
    if (ni < 0 || ni >= di) continue;
    const double ai = t.values_i[ni];
    if (ai == 0.0) continue;
    const cplx c = t.coef * ai;
    for (long mj = 0; mj < dj; ++mj) {
      const long nj = mj - t.offset_j;
      if (nj < 0 || nj >= dj) continue;
      y[mi * dj + mj] += c * t.values_j[nj] * x[ni * dj + nj];
    }
  }
}

}  // namespace

void apply(std::span<const BandTerm> terms, Shape s, const cplx* x, cplx* y) {
  std::fill(y, y + s.size(), cplx(0.0));
  for (const auto& t : terms) accumulate(t, s, x, y);
}

void apply_columns(std::span<const BandTerm> terms, Shape s, const cplx* x,
                   cplx* y, std::size_t ncols) {
  const std::size_t n = s.size();
  for (std::size_t c = 0; c < ncols; ++c) apply(terms, s, x + c * n, y + c * n);
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

}  // namespace modecouple::kernels::ref
