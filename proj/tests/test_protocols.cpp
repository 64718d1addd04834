#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "modecouple/errors.hpp"
#include "modecouple/protocols.hpp"

using namespace modecouple;
using namespace modecouple::constants;

namespace {

const ModePair zx{Axis::z, Axis::x};

TwoModeState thermal2(double ni, double nj, std::size_t di, std::size_t dj) {
  return tensor(make_thermal(ni, ModeDim(di)), make_thermal(nj, ModeDim(dj)));
}

// Second moments N_kl = <a_k^dag a_l> of a Gaussian two-mode state under
// H = a^dag K a, K = [[d/2, c], [c, -d/2]], plus heating on the diagonal.
struct Moments {
  Eigen::Matrix2cd n = Eigen::Matrix2cd::Zero();
  double rate_i = 0.0, rate_j = 0.0;

  void idle(double t) {
    n(0, 0) += rate_i * t;
    n(1, 1) += rate_j * t;
  }
  void cool(double target, double t) {
    const double nj = n(1, 1).real() + rate_j * t;
    n.setZero();
    n(0, 0) = target;
    n(1, 1) = nj;
  }
  // Blackman or rectangular window of length T with peak coupling g.
  void pulse(double g, double delta, double T, bool blackman, int steps = 20000) {
    const auto k = [&](double t) {
      const double x = two_pi * t / T;
      const double b = blackman ? 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x) : 1.0;
      Eigen::Matrix2cd m;
      m << delta / 2.0, g * b, g * b, -delta / 2.0;
      return m;
    };
    const auto f = [&](double t, const Eigen::Matrix2cd& x) -> Eigen::Matrix2cd {
      const Eigen::Matrix2cd kb = k(t).conjugate();
      Eigen::Matrix2cd d = std::complex<double>(0.0, 1.0) * (kb * x - x * kb);
      d(0, 0) += rate_i;
      d(1, 1) += rate_j;
      return d;
    };
    const double h = T / steps;
    for (int s = 0; s < steps; ++s) {
      const double t = s * h;
      const Eigen::Matrix2cd k1 = f(t, n);
      const Eigen::Matrix2cd k2 = f(t + h / 2, n + h / 2 * k1);
      const Eigen::Matrix2cd k3 = f(t + h / 2, n + h / 2 * k2);
      const Eigen::Matrix2cd k4 = f(t + h, n + h * k3);
      n += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
};

// Interleaved schedule replayed on second moments.
std::vector<std::pair<double, double>> moment_schedule(const TrapConfig& cfg,
                                                       const CoolingSetup& s,
                                                       const CoolingSchedule& c,
                                                       const NoiseModel& noise) {
  Moments m;
  m.rate_i = noise.rate(s.modes.first);
  m.rate_j = noise.rate(s.modes.second);
  m.n(0, 0) = s.initial_nbar_primary;
  m.n(1, 1) = s.initial_nbar_secondary;
  const double g = std::abs(coupling_rate(cfg, s.pulse, s.modes));
  const double delta = difference_detuning(cfg, s.pulse, s.modes);
  std::vector<std::pair<double, double>> out{{m.n(0, 0).real(), m.n(1, 1).real()}};
  for (int k = 1; k <= c.cycles; ++k) {
    m.cool(c.cooling_target, c.cool_duration);
    m.idle(c.post_cool_delay);
    out.emplace_back(m.n(0, 0).real(), m.n(1, 1).real());
    if (k < c.cycles) {
      m.pulse(g, delta, s.pulse.duration, s.pulse.envelope == EnvelopeKind::blackman);
      out.emplace_back(m.n(0, 0).real(), m.n(1, 1).real());
    }
  }
  return out;
}

CoolingSetup light_setup(const TrapConfig& cfg) {
  auto s = fixtures::cooling_setup(cfg);
  s.initial_nbar_secondary = 2.0;
  return s;
}

}  // namespace

TEST_CASE("swap exchanges thermal occupations") {
  const auto cfg = fixtures::ca40_trap();
  const double g = fixtures::swap_coupling();
  const auto pulse = swap_pulse(cfg, zx, g, EnvelopeKind::rectangular);
  const auto s = thermal2(0.2, 6.0, 50, 50);
  SwapOptions opt;
  opt.samples = 5;
  const auto out = swap(s, cfg, pulse, zx, opt);
  const auto& last = out.trace.back();
  CHECK(last.n_i == doctest::Approx(6.0).epsilon(0.02));
  CHECK(last.n_j == doctest::Approx(0.2).epsilon(0.02));
  CHECK(out.fidelity > 0.98);
  // cos^2 exchange oracle along the pulse; the 50-level box costs ~1e-5
  const double ni0 = mean_occupation(s, Mode::i), nj0 = mean_occupation(s, Mode::j);
  for (const auto& snap : out.trace) {
    const double c = std::cos(g * snap.time);
    CHECK(snap.n_i == doctest::Approx(c * c * ni0 + (1 - c * c) * nj0).epsilon(1e-4));
    CHECK(snap.n_i + snap.n_j == doctest::Approx(ni0 + nj0).epsilon(1e-6));
    CHECK(snap.trace == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("half pulse equalizes") {
    auto half = pulse;
    half.duration /= 2.0;
    const auto h = swap(s, cfg, half, zx);
    CHECK(h.trace.back().n_i == doctest::Approx(3.1).epsilon(0.02));
    CHECK(h.trace.back().n_j == doctest::Approx(3.1).epsilon(0.02));
  }
  SUBCASE("vacuum is unchanged") {
    const auto v = swap(thermal2(0.0, 0.0, 4, 4), cfg, pulse, zx);
    CHECK(v.trace.back().n_i < 1e-12);
    CHECK(v.trace.back().n_j < 1e-12);
  }
  SUBCASE("two SWAPs restore the occupations") {
    auto bl = swap_pulse(cfg, zx, g, EnvelopeKind::blackman);
    const auto cold = thermal2(0.2, 2.0, 50, 50);
    const auto once = swap(cold, cfg, bl, zx);
    const auto twice = swap(once.state, cfg, bl, zx);
    CHECK(twice.trace.back().n_i == doctest::Approx(mean_occupation(cold, Mode::i)).epsilon(1e-4));
    CHECK(twice.trace.back().n_j == doctest::Approx(mean_occupation(cold, Mode::j)).epsilon(1e-4));
    CHECK(twice.trace.back().n_i + twice.trace.back().n_j ==
          doctest::Approx(once.trace.front().n_i + once.trace.front().n_j).epsilon(1e-6));
  }
  SUBCASE("pure states take the Schrodinger path") {
    const auto f = tensor(fock_state(0, ModeDim(4)), fock_state(1, ModeDim(4)));
    const auto p = swap(f, cfg, pulse, zx);
    CHECK(p.state.is_pure());
    CHECK(p.trace.back().n_i == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(p.fidelity == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("transfer fidelity") {
  CHECK(transfer_fidelity(6.0, 6.0) == 1.0);
  CHECK(transfer_fidelity(5.7, 6.0) == doctest::Approx(0.95));
  CHECK(transfer_fidelity(0.1, 0.0) == doctest::Approx(0.9));
}

TEST_CASE("protocol helpers") {
  const auto cfg = fixtures::ca40_trap();
  CHECK(default_envelope({Axis::x, Axis::z}) == EnvelopeKind::blackman);
  CHECK(default_envelope({Axis::y, Axis::x}) == EnvelopeKind::rectangular);
  const auto p = swap_pulse(cfg, zx, fixtures::swap_coupling(), EnvelopeKind::blackman);
  CHECK(p.rectangular_equivalent() == doctest::Approx(90e-6));
  CHECK(p.frequency == doctest::Approx(cfg.omega[0] - cfg.omega[2]));
  CHECK(exchange_frame(cfg, p, zx).kind == FrameKind::rwa_difference);
  const auto off = swap_pulse(cfg, zx, fixtures::swap_coupling(), EnvelopeKind::blackman, 100.0);
  CHECK(exchange_frame(cfg, off, zx).kind == FrameKind::rwa_detuned);

  const auto n = fixtures::cooling_noise();
  CHECK(config_hash(cfg, n) == config_hash(cfg, n));
  CHECK(config_hash(cfg, n).size() == 16);
  auto m = n;
  m.heating_rate[1] += 1.0;
  CHECK(config_hash(cfg, n) != config_hash(cfg, m));

  for (double nb : {0.1, 1.0, 6.0}) {
    const std::size_t d = protocol_cutoff(nb, 1e-6);
    CHECK(std::pow(nb / (nb + 1.0), double(d)) <= 1e-6);
  }
  CHECK(swap_placement_from_string("single_final") == SwapPlacement::single_final);
  CHECK(readout_from_string("direct_y") == Readout::direct_y);
  CHECK_THROWS_AS(readout_from_string("y"), ValidationError);
}

TEST_CASE("interleaved cooling follows the second-moment oracle") {
  const auto cfg = fixtures::ca40_trap();
  const auto setup = light_setup(cfg);
  auto sched = fixtures::cooling_schedule();
  sched.cycles = 3;
  const auto noise = fixtures::cooling_noise();
  const auto res = interleaved_cooling(setup, sched, cfg, noise);
  const auto oracle = moment_schedule(cfg, setup, sched, noise);
  REQUIRE(res.steps.size() == oracle.size());
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    CHECK(res.steps[k].n_i == doctest::Approx(oracle[k].first).epsilon(1e-4));
    CHECK(res.steps[k].n_j == doctest::Approx(oracle[k].second).epsilon(1e-4));
    CHECK(res.steps[k].trace == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.steps[k].populations_i.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(res.provenance.config_hash == config_hash(cfg, noise));

  SUBCASE("detuned SWAPs") {
    auto s = setup;
    const double g = fixtures::swap_coupling();
    s.pulse = swap_pulse(cfg, zx, g, EnvelopeKind::blackman, 0.1 * g);
    sched.cycles = 2;
    const auto r = interleaved_cooling(s, sched, cfg, noise);
    const auto o = moment_schedule(cfg, s, sched, noise);
    for (std::size_t k = 0; k < o.size(); ++k) {
      CHECK(r.steps[k].n_i == doctest::Approx(o[k].first).epsilon(1e-4));
      CHECK(r.steps[k].n_j == doctest::Approx(o[k].second).epsilon(1e-4));
    }
  }
}

TEST_CASE("ideal interleaved cooling reaches the ground state") {
  const auto cfg = fixtures::ca40_trap();
  auto setup = fixtures::cooling_setup(cfg);
  setup.initial_nbar_primary = 20.0;
  setup.initial_nbar_secondary = 6.0;
  setup.cutoff_primary = 150;
  setup.cutoff_secondary = 150;
  setup.pulse = swap_pulse(cfg, zx, fixtures::swap_coupling(), EnvelopeKind::rectangular);
  auto sched = fixtures::cooling_schedule();
  sched.cooling_target = 0.0;
  const auto res = interleaved_cooling(setup, sched, cfg, NoiseModel{});
  CHECK(res.final_step().n_i < 1e-3);
  CHECK(res.final_step().n_j < 1e-3);
  // monotone in the number of cycles
  double prev = INFINITY;
  for (const auto& s : res.steps) {
    if (s.label.rfind("cool", 0) != 0) continue;
    CHECK(s.n_i + s.n_j <= prev + 1e-12);
    prev = s.n_i + s.n_j;
  }
}

TEST_CASE("single SWAP cooling") {
  const auto cfg = fixtures::ca40_trap();
  const auto setup = light_setup(cfg);
  SUBCASE("no heating is pure bookkeeping") {
    NoiseModel n;
    n.cooling_target = 0.1;
    const auto r = single_swap_cooling(setup, 1e-3, 0.0, cfg, n);
    REQUIRE(r.steps.size() == 3);
    const auto& before = r.steps[1];
    CHECK(r.final_step().n_j == doctest::Approx(before.n_i).epsilon(1e-5));
    CHECK(r.final_step().n_j == doctest::Approx(0.1).epsilon(1e-4));
    CHECK(r.final_step().n_i == doctest::Approx(before.n_j).epsilon(1e-5));
  }
  SUBCASE("with heating the secondary is cold and the primary hot") {
    const auto noise = fixtures::cooling_noise();
    const auto r = single_swap_cooling(setup, 1e-3, 20e-6, cfg, noise);
    CHECK(r.final_step().n_j < 1.0);
    CHECK(r.final_step().n_i > 2.0);
    CHECK(r.final_step().time == doctest::Approx(1e-3 + 20e-6 + setup.pulse.duration));
  }
}

TEST_CASE("single SWAP is more sensitive to the drive frequency") {
  const auto cfg = fixtures::ca40_trap();
  const auto noise = fixtures::cooling_noise();
  auto sched = fixtures::cooling_schedule();
  sched.cycles = 4;
  const double g = fixtures::swap_coupling();
  const auto nominal = light_setup(cfg);
  auto detuned = nominal;
  // 5% of the resonant splitting 2g
  detuned.pulse = swap_pulse(cfg, zx, g, EnvelopeKind::blackman, 0.05 * 2.0 * g);
  const auto single = [&](const CoolingSetup& s) {
    return single_swap_cooling(s, sched.cool_duration, sched.post_cool_delay, cfg, noise)
        .final_step()
        .n_j;
  };
  const auto inter = [&](const CoolingSetup& s) {
    return interleaved_cooling(s, sched, cfg, noise).final_step().n_j;
  };
  const double d_single = single(detuned) - single(nominal);
  const double d_inter = inter(detuned) - inter(nominal);
  CHECK(d_single > 0.0);
  CHECK(d_single > d_inter);
}

TEST_CASE("cooling inputs are validated") {
  const auto cfg = fixtures::ca40_trap();
  const auto setup = light_setup(cfg);
  auto sched = fixtures::cooling_schedule();
  sched.cycles = 0;
  CHECK_THROWS_AS(interleaved_cooling(setup, sched, cfg, NoiseModel{}), ValidationError);
  sched.cycles = 2;
  sched.placement = SwapPlacement::single_final;
  CHECK_THROWS_AS(interleaved_cooling(setup, sched, cfg, NoiseModel{}), ValidationError);
  auto bad = setup;
  bad.modes = {Axis::x, Axis::x};
  CHECK_THROWS_AS(single_swap_cooling(bad, 1e-3, 0.0, cfg, NoiseModel{}), ValidationError);
  auto tight = setup;
  tight.cutoff_primary = tight.cutoff_secondary = 12;
  CHECK_THROWS_AS(single_swap_cooling(tight, 1e-3, 0.0, cfg, NoiseModel{}), TruncationError);
}

TEST_CASE("heating-rate experiment") {
  const auto cfg = fixtures::ca40_trap();
  const auto noise = fixtures::cooling_noise();
  const auto dbl = heating_probabilities(cfg, noise,
                                         fixtures::heating_experiment(Readout::double_swap_via_x));
  const auto dir =
      heating_probabilities(cfg, noise, fixtures::heating_experiment(Readout::direct_y));
  CHECK(dbl.probe.mode == Axis::x);
  CHECK(dir.probe.mode == Axis::y);
  CHECK(dir.probe.pulse_time > 4.0 * dbl.probe.pulse_time);
  // the secondary heats linearly during the wait
  const auto& s = dir.steps;
  const double slope = (s.back().n_j - s.front().n_j) / (dir.waits.back() - dir.waits.front());
  CHECK(slope == doctest::Approx(810.0).epsilon(1e-3));

  SUBCASE("exact probabilities fit back to the true rate") {
    const auto f = fit_heating_line(dbl.probe, dbl.waits, dbl.p_red, dbl.p_blue, 500);
    CHECK(f.ok);
    CHECK(f.rate == doctest::Approx(810.0).epsilon(0.01));
    CHECK(f.rate_error > 0.0);
  }
  SUBCASE("500 shots recover 810 within 10 percent") {
    const auto r = sample_heating(dbl, 500, 7);
    const auto* rate = r.find("heating_rate");
    REQUIRE(rate != nullptr);
    CHECK(rate->ok);
    CHECK(rate->value == doctest::Approx(810.0).epsilon(0.10));
    CHECK(rate->error > 0.0);
    CHECK(r.find("initial_nbar")->error > 0.0);
    for (const auto& st : r.steps) CHECK(st.measured.size() == 3);
  }
  SUBCASE("seeded draws are reproducible") {
    const auto a = sample_heating(dbl, 500, 11);
    const auto b = sample_heating(dbl, 500, 11);
    CHECK(a.find("heating_rate")->value == b.find("heating_rate")->value);
  }
  SUBCASE("direct readout is less precise") {
    double ed = 0.0, ex = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ed += sample_heating(dir, 500, seed).find("heating_rate")->error;
      ex += sample_heating(dbl, 500, seed).find("heating_rate")->error;
    }
    CHECK(ed > ex);
  }
  SUBCASE("no heating gives a flat line") {
    auto n = noise;
    n.heating_rate[1] = 0.0;
    auto e = fixtures::heating_experiment(Readout::double_swap_via_x);
    const auto r = heating_rate_experiment(cfg, n, e);
    const auto* rate = r.find("heating_rate");
    CHECK(std::abs(rate->value) < 3.0 * rate->error);
  }
  SUBCASE("inputs") {
    auto e = fixtures::heating_experiment(Readout::direct_y);
    e.waits = {0.0, 1e-3};
    CHECK_THROWS_AS(heating_rate_experiment(cfg, noise, e), ValidationError);
    const std::vector<double> w{0.0, 1e-3, 2e-3}, sat{0.5, 0.5, 0.5};
    CHECK_THROWS_AS(fit_heating_line(dbl.probe, w, sat, sat, 100), NumericalError);
  }
}

TEST_CASE("squeezing experiment") {
  const auto cfg = fixtures::ca40_trap();
  DrivePulse p;
  p.frequency = cfg.omega[0] + cfg.omega[2];
  p.duration = 1e-3;
  const ModePair xz{Axis::x, Axis::z};
  DrivePulse unit = p;
  unit.amplitude = 1.0;
  const double g = angular(5e3);
  p.amplitude = g / std::abs(coupling_rate(cfg, unit, xz));
  p.phase = 0.3;
  std::vector<double> t;
  for (double gt : {0.0, 0.25, 0.5, 1.0, 1.5}) t.push_back(gt / g);
  const auto r = squeeze_experiment(cfg, p, xz, t);
  REQUIRE(r.steps.size() == t.size());
  CHECK(r.steps[0].measured[0].value == doctest::Approx(0.5).epsilon(1e-12));
  const double s1 = std::sinh(1.0);
  CHECK(r.steps[3].n_i == doctest::Approx(s1 * s1).epsilon(0.01));
  CHECK(r.steps[3].n_j == doctest::Approx(s1 * s1).epsilon(0.01));
  for (std::size_t k = 1; k < t.size(); ++k) {
    CHECK(r.steps[k].measured[0].value < r.steps[k - 1].measured[0].value);
    CHECK(r.steps[k].measured[0].value < 0.5);
  }
}
