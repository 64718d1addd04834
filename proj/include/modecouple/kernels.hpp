#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace modecouple::kernels {

using cplx = std::complex<double>;

/// coef * (A (x) B) with A, B single-offset banded:
/// A[n + offset_i, n] = values_i[n].
struct BandTerm {
  cplx coef;
  int offset_i;
  const double* values_i;
  int offset_j;
  const double* values_j;
};

struct Shape {
  std::size_t dim_i;
  std::size_t dim_j;
  std::size_t size() const { return dim_i * dim_j; }
};

// Serial reference versions. Kept simple; the parallel versions must agree
// with them to rounding.
namespace ref {
/// y = sum_k terms[k] x
void apply(std::span<const BandTerm> terms, Shape s, const cplx* x, cplx* y);
/// Y = sum_k terms[k] X for ncols column-major columns of length s.size()
void apply_columns(std::span<const BandTerm> terms, Shape s, const cplx* x,
                   cplx* y, std::size_t ncols);
/// y += alpha x
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);
}  // namespace ref

// OpenMP versions.
namespace omp {
void apply(std::span<const BandTerm> terms, Shape s, const cplx* x, cplx* y);
void apply_columns(std::span<const BandTerm> terms, Shape s, const cplx* x,
                   cplx* y, std::size_t ncols);
void axpy(std::size_t n, cplx alpha, const cplx* x, cplx* y);
}  // namespace omp

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace modecouple::kernels
