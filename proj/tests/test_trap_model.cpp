#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "modecouple/errors.hpp"
#include "modecouple/hamiltonian.hpp"

using namespace modecouple;
using namespace modecouple::constants;
using fixtures::ca40_trap;

TEST_CASE("coupling rate") {
  const auto cfg = ca40_trap();
  DrivePulse p;
  p.amplitude = 2.0;
  p.frequency = angular(1.6e6);
  p.duration = 100e-6;
  const ModePair xz{Axis::x, Axis::z};

  SUBCASE("formula oracle") {
    // plain evaluation in long double
    const long double q = 1.602176634e-19L, m = 40.0L * 1.66053906660e-27L;
    const long double wx = 2.0L * 3.14159265358979323846L * 2.6e6L;
    const long double wz = 2.0L * 3.14159265358979323846L * 1.0e6L;
    const long double D = 300e-6L;
    const long double oracle = q * 2.0L / (4.0L * m * std::sqrt(wx * wz) * D * D);
    CHECK(std::abs(coupling_rate(cfg, p, xz) - double(oracle)) / double(oracle) < 1e-12);
  }
  SUBCASE("zero amplitude") {
    p.amplitude = 0.0;
    CHECK(coupling_rate(cfg, p, xz) == 0.0);
  }
  SUBCASE("scalings") {
    const double g0 = coupling_rate(cfg, p, xz);
    auto p2 = p;
    p2.amplitude *= 3.0;
    CHECK(coupling_rate(cfg, p2, xz) / g0 == doctest::Approx(3.0).epsilon(1e-14));
    auto c = cfg;
    c.charge *= 2.0;
    CHECK(coupling_rate(c, p, xz) / g0 == doctest::Approx(2.0).epsilon(1e-14));
    c = cfg;
    c.mass *= 2.0;
    CHECK(coupling_rate(c, p, xz) / g0 == doctest::Approx(0.5).epsilon(1e-14));
    c = cfg;
    c.omega[0] *= 4.0;
    c.omega[2] *= 1.0;
    CHECK(coupling_rate(c, p, xz) / g0 == doctest::Approx(0.5).epsilon(1e-14));
    c = cfg;
    c.set_curvature(Axis::x, Axis::z, 600e-6);
    CHECK(coupling_rate(c, p, xz) / g0 == doctest::Approx(0.25).epsilon(1e-14));
    c.set_curvature(Axis::x, Axis::z, 600e-6, -1);
    CHECK(coupling_rate(c, p, xz) / g0 == doctest::Approx(-0.25).epsilon(1e-14));
  }
  SUBCASE("reaches the 10 kHz scale") {
    p.amplitude = 1.0;
    auto c = cfg;
    c.set_curvature(Axis::x, Axis::z, 100e-6);
    CHECK(coupling_rate(c, p, xz) > angular(1e3));
    CHECK(amplitude_for_coupling(c, xz, angular(10e3)) < 10.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(coupling_rate(cfg, p, {Axis::x, Axis::x}), ValidationError);
    auto c = cfg;
    CHECK_THROWS_AS(c.set_curvature(Axis::x, Axis::z, -1.0), ValidationError);
    CHECK_THROWS_AS(c.set_curvature(Axis::x, Axis::z, 0.0), ValidationError);
  }
  SUBCASE("amplitude inverse") {
    const double g = angular(2.78e3);
    auto q = p;
    q.amplitude = amplitude_for_coupling(cfg, xz, g);
    CHECK(coupling_rate(cfg, q, xz) == doctest::Approx(g).epsilon(1e-13));
  }
}

TEST_CASE("config validation names the field") {
  auto cfg = ca40_trap();
  CHECK_NOTHROW(cfg.validate());
  cfg.mass = -1.0;
  try {
    cfg.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("trap.mass") != std::string::npos);
  }
  cfg = ca40_trap();
  cfg.omega[1] = cfg.omega[0];
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = ca40_trap();
  cfg.laser_projection = {1.0, 1.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  DrivePulse p;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("swap time") {
  CHECK(swap_time(angular(2.78e3)) * 1e6 == doctest::Approx(89.928).epsilon(1e-4));
  CHECK(swap_time(angular(5e3)) == doctest::Approx(50e-6).epsilon(1e-14));
  double prev = swap_time(1.0);
  for (double g = 10.0; g < 1e9; g *= 10.0) {
    const double t = swap_time(g);
    CHECK(t < prev);
    prev = t;
  }
  CHECK(prev < 2e-8);
  CHECK_THROWS_AS(swap_time(0.0), ValidationError);
  CHECK_THROWS_AS(swap_time(-1.0), ValidationError);
}

TEST_CASE("driven motion") {
  const auto cfg = ca40_trap();
  DrivePulse p;
  p.amplitude = 1.0;
  p.frequency = angular(1.7e6);
  p.duration = 1e-3;
  SUBCASE("oracle") {
    const double wx = cfg.omega[0];
    const double oracle =
        cfg.charge * 1.0 / (cfg.mass * 150e-6) / (wx * wx - p.frequency * p.frequency);
    CHECK(driven_motion_amplitude(cfg, p, Axis::x) == doctest::Approx(oracle).epsilon(1e-13));
  }
  SUBCASE("zero amplitude") {
    p.amplitude = 0.0;
    CHECK(projected_driven_amplitude(cfg, p) == 0.0);
  }
  SUBCASE("A over g is fixed by linearity") {
    const ModePair xz{Axis::x, Axis::z};
    const double r1 = projected_driven_amplitude(cfg, p) / coupling_rate(cfg, p, xz);
    p.amplitude *= 2.0;
    const double r2 = projected_driven_amplitude(cfg, p) / coupling_rate(cfg, p, xz);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-14));
  }
  SUBCASE("resonant drive is rejected") {
    p.frequency = cfg.omega[2] + angular(1e3);
    CHECK_THROWS_AS(driven_motion_amplitude(cfg, p, Axis::z), ValidationError);
    CHECK_THROWS_AS(projected_driven_amplitude(cfg, p), ValidationError);
  }
}

TEST_CASE("detuned splitting") {
  const double g = angular(3e3);
  CHECK(detuned_splitting(g, 0.0) == doctest::Approx(2.0 * g).epsilon(1e-14));
  CHECK(detuned_splitting(0.0, angular(7e3)) == doctest::Approx(angular(7e3)).epsilon(1e-14));
  // quadratic-formula oracle for the block [D/2, g; g, -D/2]
  const double d = angular(4e3);
  const double tr = 0.0, det = -(d * d / 4.0) - g * g;
  const double oracle = 2.0 * std::sqrt(tr * tr / 4.0 - det);
  CHECK(detuned_splitting(g, d) == doctest::Approx(oracle).epsilon(1e-13));
  for (double delta = -angular(50e3); delta <= angular(50e3); delta += angular(1.7e3))
    CHECK(detuned_splitting(g, delta) >= 2.0 * g * (1.0 - 1e-14));
}

TEST_CASE("envelope") {
  const double T = 200e-6;
  const Envelope b{EnvelopeKind::blackman, T, 0.0};
  CHECK(std::abs(b(0.0)) < 1e-15);
  CHECK(std::abs(b(T)) < 1e-15);
  CHECK(b(T / 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b(-1e-9) == 0.0);
  CHECK(b(T + 1e-9) == 0.0);
  CHECK(b.area() == doctest::Approx(0.42 * T).epsilon(1e-14));
  // midpoint-rule oracle for a partial integral
  const int n = 200000;
  double sum = 0.0;
  const double t0 = 0.13 * T, t1 = 0.71 * T, h = (t1 - t0) / n;
  for (int k = 0; k < n; ++k) sum += b(t0 + (k + 0.5) * h) * h;
  CHECK(b.integral(t0, t1) == doctest::Approx(sum).epsilon(1e-9));
  const Envelope r{EnvelopeKind::rectangular, T, 1e-6};
  CHECK(r(1e-6 + T / 2.0) == 1.0);
  CHECK(r.area() == doctest::Approx(T));
  CHECK(equal_area_duration(EnvelopeKind::blackman, 42e-6) == doctest::Approx(100e-6));

  const auto p = DrivePulse::equal_area(1.5, 0.0, EnvelopeKind::blackman, 90e-6);
  CHECK(p.duration == doctest::Approx(90e-6 / 0.42));
  CHECK(p.rectangular_equivalent() == doctest::Approx(90e-6));
}

namespace {

Matrix block_01(const Matrix& h, std::size_t dj) {
  // rows/cols |1,0> and |0,1>
  Matrix b(2, 2);
  const Eigen::Index a = Eigen::Index(dj), c = 1;
  b << h(a, a), h(a, c), h(c, a), h(c, c);
  return b;
}

}  // namespace

TEST_CASE("Hamiltonian frames") {
  const auto cfg = ca40_trap();
  const ModePair xz{Axis::x, Axis::z};
  const double g = angular(3e3);
  auto pulse = fixtures::exchange_pulse(cfg, xz, g, 100e-6);
  HamiltonianOptions opt;
  opt.dim_i = ModeDim(4);
  opt.dim_j = ModeDim(5);

  SUBCASE("exchange block splits by 2g") {
    const auto h = build_hamiltonian(cfg, pulse, xz, Frame::difference(), opt);
    const Matrix b = block_01(h.dense(50e-6), 5);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-g).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(g).epsilon(1e-12));
    CHECK(h.conserved_sign() == 1);
    CHECK(h.dense(-1e-6).norm() == 0.0);  // outside the window
  }
  SUBCASE("detuned frame with zero detuning") {
    const auto a = build_hamiltonian(cfg, pulse, xz, Frame::difference(), opt).dense(30e-6);
    const auto b = build_hamiltonian(cfg, pulse, xz, Frame::detuned(0.0), opt).dense(30e-6);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    double prev = 1e300;
    for (double delta : {1e4, 1e3, 1e2, 1e1, 1.0}) {
      const auto c = build_hamiltonian(cfg, pulse, xz, Frame::detuned(delta), opt).dense(30e-6);
      const double dist = (c - a).operatorNorm();
      CHECK(dist < prev);
      CHECK(dist <= delta * 5.0);
      prev = dist;
    }
    const auto d = build_hamiltonian(cfg, pulse, xz, Frame::detuned(angular(4e3)), opt);
    Eigen::SelfAdjointEigenSolver<Matrix> es(block_01(d.dense(30e-6), 5));
    CHECK(es.eigenvalues()(1) - es.eigenvalues()(0) ==
          doctest::Approx(detuned_splitting(g, angular(4e3))).epsilon(1e-12));
  }
  SUBCASE("sum frame conserves n_i - n_j") {
    auto sp = pulse;
    sp.frequency = cfg.omega[0] + cfg.omega[2];
    const auto h = build_hamiltonian(cfg, sp, xz, Frame::sum(), opt);
    CHECK(h.conserved_sign() == -1);
    const Matrix m = h.dense(10e-6);
    CHECK(std::abs(m(5 + 1, 0)) == doctest::Approx(g).epsilon(1e-12));  // <1,1|H|0,0>
  }
  SUBCASE("full frame is Hermitian") {
    HamiltonianOptions full = opt;
    full.single_mode_terms = true;
    full.linear_terms = true;
    pulse.phase = 0.7;
    const auto h = build_hamiltonian(cfg, pulse, xz, Frame::full(), full);
    for (double t : {1e-7, 3.3e-6, 41.234e-6, 99e-6}) {
      const Matrix m = h.dense(t);
      CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()));
      CHECK(h.hermiticity_defect(t) < 1e-14);
    }
    CHECK(!h.conserved_sign());
  }
  SUBCASE("period average of the full frame is the exchange Hamiltonian") {
    // Commensurate frequencies: every tone is a multiple of 1 MHz.
    auto c = cfg;
    c.omega = {angular(3e6), angular(2.5e6), angular(1e6)};
    const auto p = fixtures::exchange_pulse(c, xz, g, 1.0);
    HamiltonianOptions cw = opt;
    cw.continuous_wave = true;
    for (double phase : {0.0, 1.1}) {
      auto q = p;
      q.phase = phase;
      const auto full = build_hamiltonian(c, q, xz, Frame::full(), cw);
      const auto rwa = build_hamiltonian(c, q, xz, Frame::difference(), cw);
      const int n = 64;
      const double period = 1e-6;
      Matrix avg = Matrix::Zero(20, 20);
      for (int k = 0; k < n; ++k) avg += full.dense(k * period / n) / double(n);
      CHECK((avg - rwa.dense(0.0)).cwiseAbs().maxCoeff() < 1e-9 * g);
    }
  }
  SUBCASE("frame names") {
    CHECK(frame_kind_from_string("rwa_sum") == FrameKind::rwa_sum);
    CHECK(frame_kind_from_string("full") == FrameKind::full_lab_interaction);
    CHECK_THROWS_AS(frame_kind_from_string("lab"), ValidationError);
  }
}
