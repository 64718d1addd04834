#include "doctest.h"

#include <random>

#include "modecouple/hamiltonian.hpp"
#include "modecouple/kernels.hpp"

using namespace modecouple;

namespace {

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (auto& c : v) c = cplx(nd(rng), nd(rng));
  return v;
}

Hamiltonian mixed_hamiltonian(std::size_t di, std::size_t dj) {
  const ModeDim a(di), b(dj);
  Hamiltonian h(a, b);
  h.add({{{cplx(0.3, 0.2), 0.0}}, std::nullopt, BandFactor::create(a), BandFactor::annihilate(b)});
  h.add({{{cplx(0.3, -0.2), 0.0}}, std::nullopt, BandFactor::annihilate(a), BandFactor::create(b)});
  h.add({{{cplx(1.5, 0.0), 0.0}}, std::nullopt, BandFactor::number(a), BandFactor::identity(b)});
  h.add({{{cplx(0.0, 0.7), 0.0}}, std::nullopt, BandFactor::create_squared(a), BandFactor::create(b)});
  h.add({{{cplx(-0.4, 0.1), 0.0}}, std::nullopt, BandFactor::identity(a), BandFactor::annihilate_squared(b)});
  return h;
}

}  // namespace

TEST_CASE("banded kernels agree with dense products") {
  std::mt19937_64 rng(7);
  for (auto [di, dj] : {std::pair<std::size_t, std::size_t>{3, 4}, {17, 9}, {80, 90}}) {
    const auto h = mixed_hamiltonian(di, dj);
    const auto terms = h.band_terms(0.0);
    const kernels::Shape shape{di, dj};
    const Vector x = random_vector(Eigen::Index(di * dj), rng);
    Vector y_ref(x.size()), y_omp(x.size());
    kernels::ref::apply(terms, shape, x.data(), y_ref.data());
    kernels::omp::apply(terms, shape, x.data(), y_omp.data());
    const Vector y_dense = h.dense(0.0) * x;
    CHECK((y_ref - y_dense).cwiseAbs().maxCoeff() < 1e-12 * x.cwiseAbs().maxCoeff() * 10);
    CHECK((y_omp - y_ref).cwiseAbs().maxCoeff() < 1e-13 * y_ref.cwiseAbs().maxCoeff());

    const std::size_t ncols = 3;
    Matrix X(x.size(), Eigen::Index(ncols));
    for (std::size_t c = 0; c < ncols; ++c) X.col(Eigen::Index(c)) = random_vector(x.size(), rng);
    Matrix Y_ref(X.rows(), X.cols()), Y_omp(X.rows(), X.cols());
    kernels::ref::apply_columns(terms, shape, X.data(), Y_ref.data(), ncols);
    kernels::omp::apply_columns(terms, shape, X.data(), Y_omp.data(), ncols);
    CHECK((Y_ref - h.dense(0.0) * X).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((Y_omp - Y_ref).cwiseAbs().maxCoeff() < 1e-12);

    Vector a = x, b = x;
    kernels::ref::axpy(std::size_t(x.size()), cplx(0.5, -2.0), y_ref.data(), a.data());
    kernels::omp::axpy(std::size_t(x.size()), cplx(0.5, -2.0), y_ref.data(), b.data());
    CHECK((a - (x + cplx(0.5, -2.0) * y_ref)).norm() < 1e-12 * a.norm());
    CHECK((a - b).norm() == 0.0);
  }
  CHECK(kernels::max_threads() >= 1);
}

TEST_CASE("band factors") {
  const ModeDim d(6);
  CHECK((BandFactor::annihilate(d).dense() - ModeOperator::annihilate(d).matrix).norm() == 0.0);
  CHECK((BandFactor::create(d).dense() - ModeOperator::create(d).matrix).norm() == 0.0);
  CHECK((BandFactor::number(d).dense() - ModeOperator::number(d).matrix).norm() < 1e-15);
  const Matrix a = ModeOperator::annihilate(d).matrix;
  CHECK((BandFactor::annihilate_squared(d).dense() - a * a).norm() < 1e-14);
  CHECK((BandFactor::create_squared(d).dense() - (a * a).adjoint()).norm() < 1e-14);
  CHECK(BandFactor::number(d).max_abs() == 5.0);
}
