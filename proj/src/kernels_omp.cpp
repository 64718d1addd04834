#include "modecouple/kernels.hpp"

#include <omp.h>

namespace modecouple::kernels {

int max_threads() { return omp_get_max_threads(); }

namespace omp {

namespace {

constexpr std::size_t kParallelThreshold = 4096;

// Row block of y: target mode-i level mi, all mode-j levels.
inline void row_update(std::span<const BandTerm> terms, long mi, long di, long dj,
                       const cplx* x, cplx* yrow) {
  for (long mj = 0; mj < dj; ++mj) yrow[mj] = 0.0;
  for (const auto& t : terms) {
    const long ni = mi - t.offset_i;
    if (ni < 0 || ni >= di) continue;
    const double ai = t.values_i[ni];
    if (ai == 0.0) continue;
    const cplx c = t.coef * ai;
    const double cr = c.real(), ci = c.imag();
    const long oj = t.offset_j;
    const long lo = oj > 0 ? oj : 0;
    const long hi = oj < 0 ? dj + oj : dj;
    // interleaved re/im views; plain real arithmetic avoids the checked
    // complex multiply
    const double* __restrict vj = t.values_j - oj;
    const double* __restrict xr = reinterpret_cast<const double*>(x + ni * dj - oj);
    double* __restrict yr = reinterpret_cast<double*>(yrow);
    for (long mj = lo; mj < hi; ++mj) {
      const double v = vj[mj], a = xr[2 * mj], b = xr[2 * mj + 1];
      yr[2 * mj] += v * (cr * a - ci * b);
      yr[2 * mj + 1] += v * (cr * b + ci * a);
    }
  }
}

}  // namespace

void apply(std::span<const BandTerm> terms, Shape s, const cplx* x, cplx* y) {
  const auto di = static_cast<long>(s.dim_i);
  const auto dj = static_cast<long>(s.dim_j);
#pragma omp parallel for schedule(static) if (s.size() >= kParallelThreshold)
  for (long mi = 0; mi < di; ++mi) row_update(terms, mi, di, dj, x, y + mi * dj);
}

void apply_columns(std::span<const BandTerm> terms, Shape s, const cplx* x,
                   cplx* y, std::size_t ncols) {
  const auto di = static_cast<long>(s.dim_i);
  const auto dj = static_cast<long>(s.dim_j);
  const std::size_t n = s.size();
  const auto cols = static_cast<long>(ncols);
#pragma omp parallel for collapse(2) schedule(static) \
    if (n * ncols >= kParallelThreshold)
  for (long c = 0; c < cols; ++c)
    for (long mi = 0; mi < di; ++mi)
      row_update(terms, mi, di, dj, x + c * n, y + c * n + mi * dj);
}

void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y) {
  const auto len = static_cast<long>(n);
#pragma omp parallel for simd schedule(static) if (n >= kParallelThreshold)
  for (long k = 0; k < len; ++k) y[k] += alpha * x[k];
}

}  // namespace omp
}  // namespace modecouple::kernels
