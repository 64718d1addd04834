// Serial reference against OpenMP kernels on a beamsplitter-like operator
// (a_i^dag a_j + h.c. plus both number operators).

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "modecouple/kernels.hpp"

using namespace modecouple::kernels;

namespace {

struct Problem {
  Shape shape;
  std::vector<double> up_i, down_i, num_i, up_j, down_j, num_j, ones_i, ones_j;
  std::vector<BandTerm> terms;
  std::vector<cplx> x, y;

  Problem(std::size_t d, std::size_t ncols = 1) : shape{d, d} {
    for (std::size_t n = 0; n < d; ++n) {
      const double s = std::sqrt(double(n + 1));
      up_i.push_back(s), down_i.push_back(s), up_j.push_back(s), down_j.push_back(s);
      num_i.push_back(double(n)), num_j.push_back(double(n));
      ones_i.push_back(1.0), ones_j.push_back(1.0);
    }
    // a^dag has offset +1 (row n + 1, column n), a has offset -1
    terms = {
        {cplx(0.3, 0.1), 1, up_i.data(), -1, down_j.data()},
        {cplx(0.3, -0.1), -1, down_i.data(), 1, up_j.data()},
        {cplx(1.0, 0.0), 0, num_i.data(), 0, ones_j.data()},
        {cplx(-1.0, 0.0), 0, ones_i.data(), 0, num_j.data()},
    };
    x.resize(shape.size() * ncols);
    y.resize(shape.size() * ncols);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = cplx(std::sin(0.1 * k), std::cos(0.3 * k));
  }
};

template <auto Fn>
void bm_apply(benchmark::State& state) {
  Problem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Fn(p.terms, p.shape, p.x.data(), p.y.data());
    benchmark::DoNotOptimize(p.y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.shape.size()));
}

template <auto Fn>
void bm_apply_columns(benchmark::State& state) {
  const std::size_t cols = 16;
  Problem p(static_cast<std::size_t>(state.range(0)), cols);
  for (auto _ : state) {
    Fn(p.terms, p.shape, p.x.data(), p.y.data(), cols);
    benchmark::DoNotOptimize(p.y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.shape.size() * cols));
}

template <auto Fn>
void bm_axpy(benchmark::State& state) {
  Problem p(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Fn(p.x.size(), cplx(0.5, -0.25), p.x.data(), p.y.data());
    benchmark::DoNotOptimize(p.y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.x.size()));
}

}  // namespace

BENCHMARK(bm_apply<ref::apply>)->Name("apply/ref")->Arg(30)->Arg(80)->Arg(200);
BENCHMARK(bm_apply<omp::apply>)->Name("apply/omp")->Arg(30)->Arg(80)->Arg(200);
BENCHMARK(bm_apply_columns<ref::apply_columns>)->Name("apply_columns/ref")->Arg(30)->Arg(80);
BENCHMARK(bm_apply_columns<omp::apply_columns>)->Name("apply_columns/omp")->Arg(30)->Arg(80);
BENCHMARK(bm_axpy<ref::axpy>)->Name("axpy/ref")->Arg(80)->Arg(200);
BENCHMARK(bm_axpy<omp::axpy>)->Name("axpy/omp")->Arg(80)->Arg(200);

BENCHMARK_MAIN();
