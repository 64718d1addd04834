#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "modecouple/bessel.hpp"
#include "modecouple/errors.hpp"
#include "modecouple/fitting.hpp"
#include "modecouple/spectroscopy.hpp"

using namespace modecouple;
using namespace modecouple::constants;

namespace {

// J_n(x) = (1/pi) int_0^pi cos(n tau - x sin tau) d tau; the trapezoid rule
// is spectrally accurate for this periodic integrand.
double bessel_oracle(int n, double x) {
  const int m = 2000;
  double s = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double tau = pi * k / m;
    const double w = (k == 0 || k == m) ? 0.5 : 1.0;
    s += w * std::cos(n * tau - x * std::sin(tau));
  }
  return s / m;
}

template <class F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LaserProbe probe_with_eta(double eta, double rabi = angular(100e3)) {
  LaserProbe p;
  p.rabi_frequency = rabi;
  p.lamb_dicke = {eta, eta, eta};
  p.mode = Axis::x;
  return p;
}

RealVector fock_populations(std::size_t n, std::size_t d) {
  RealVector p = RealVector::Zero(Eigen::Index(d));
  p(Eigen::Index(n)) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("Bessel functions against the integral representation") {
  for (int n : {0, 1, 2})
    for (double x = 0.0; x <= 10.0; x += 0.05)
      CHECK(std::abs(bessel_j(n, x) - bessel_oracle(n, x)) < 1e-10);
  CHECK(bessel_j(-1, 1.3) == doctest::Approx(-bessel_j(1, 1.3)));
  CHECK(bessel_j(1, -1.3) == doctest::Approx(-bessel_j(1, 1.3)));
  CHECK(carrier_suppression(0.0, 0) == 1.0);
  CHECK(carrier_suppression(0.0, 1) == 0.0);
  const double zero = bisect([](double x) { return bessel_oracle(0, x); }, 2.0, 3.0);
  CHECK(zero == doctest::Approx(2.4048).epsilon(1e-4));
  CHECK(carrier_suppression(zero, 0) < 1e-4);
  const double cross = bisect([](double x) { return bessel_oracle(0, x) - bessel_oracle(1, x); },
                              1.0, 2.0);
  CHECK(cross == doctest::Approx(1.435).epsilon(1e-3));
  CHECK(carrier_suppression(cross, 0) == doctest::Approx(carrier_suppression(cross, 1)).epsilon(1e-9));
  CHECK_THROWS_AS(carrier_suppression(-0.1, 0), ValidationError);
}

TEST_CASE("sideband excitation") {
  const auto p = probe_with_eta(0.05);
  SUBCASE("ground state has no red sideband") {
    for (double t : {1e-6, 1e-4, 3e-3})
      CHECK(sideband_excitation(fock_populations(0, 10), p, Sideband::red, t) == 0.0);
  }
  SUBCASE("pi pulse on |1>") {
    const double t = pi / (p.rabi_frequency * 0.05);
    CHECK(sideband_excitation(fock_populations(1, 10), p, Sideband::red, t) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("incoherent limit of a thermal state") {
    auto q = p;
    q.coherence_time = 1e-6;
    const auto pop = thermal_populations(6.0, ModeDim(150));
    const double r = sideband_excitation(pop, q, Sideband::red, 1e-3) /
                     sideband_excitation(pop, q, Sideband::blue, 1e-3);
    CHECK(r == doctest::Approx(6.0 / 7.0).epsilon(1e-6));
  }
  SUBCASE("carrier") {
    const double om = sideband_rabi_frequency(p, Sideband::carrier, 0);
    CHECK(om == doctest::Approx(p.rabi_frequency * (1.0 - 0.0025 * 0.5)));
  }
  SUBCASE("bounds and ordering") {
    for (double nbar : {0.05, 0.5, 3.0, 12.0}) {
      const auto pop = thermal_populations(nbar, ModeDim(thermal_cutoff(nbar)));
      for (double t = 0.0; t < 2e-3; t += 37e-6) {
        const double r = sideband_excitation(pop, p, Sideband::red, t);
        const double b = sideband_excitation(pop, p, Sideband::blue, t);
        CHECK(r >= 0.0);
        CHECK(b <= 1.0);
        CHECK(r <= b + 1e-15);
      }
      CHECK(sideband_excitation(pop, p, Sideband::red, 5e-6) <
            sideband_excitation(pop, p, Sideband::blue, 5e-6));
    }
  }
  SUBCASE("detuning lowers the excitation") {
    auto q = p;
    const double t = pi / (p.rabi_frequency * 0.05);
    q.detuning = 2.0 * p.rabi_frequency * 0.05;
    CHECK(sideband_excitation(fock_populations(1, 10), q, Sideband::red, t) < 0.5);
  }
  SUBCASE("Lamb-Dicke regime is enforced") {
    CHECK_THROWS_AS(sideband_excitation(fock_populations(1, 4), probe_with_eta(0.35),
                                        Sideband::red, 1e-6),
                    ValidationError);
  }
}

TEST_CASE("sideband thermometry") {
  CHECK(estimate_nbar(0.0, 0.4).value == 0.0);
  CHECK(estimate_nbar(6.0 / 7.0 * 0.7, 0.7).value == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(estimate_nbar(0.13 / 1.13 * 0.5, 0.5).value == doctest::Approx(0.13).epsilon(1e-12));
  const auto bad = estimate_nbar(0.5, 0.4);
  CHECK(!bad.ok);
  CHECK(!bad.message.empty());

  const auto e100 = estimate_nbar(0.2, 0.4, 100), e400 = estimate_nbar(0.2, 0.4, 400);
  CHECK(e100.error > 0.0);
  CHECK(e100.error / e400.error == doctest::Approx(2.0).epsilon(1e-12));

  const auto p = probe_with_eta(0.05);
  for (double nbar : {0.05, 0.1, 0.5, 1.0, 3.0, 6.0, 12.0, 20.0}) {
    const auto pop = thermal_populations(nbar, ModeDim(thermal_cutoff(nbar)));
    const double t = 0.5 * pi / (p.rabi_frequency * 0.05);
    const auto est = estimate_nbar(sideband_excitation(pop, p, Sideband::red, t),
                                   sideband_excitation(pop, p, Sideband::blue, t));
    CHECK(est.ok);
    CHECK(est.value == doctest::Approx(nbar).epsilon(0.02));
  }
}

TEST_CASE("fits") {
  SUBCASE("two Lorentzians") {
    PeakFit truth;
    truth.peaks = 2;
    truth.center = {-3.0, 4.5};
    truth.width = {1.0, 1.4};
    truth.amplitude = {0.4, 0.25};
    truth.offset = 0.01;
    std::vector<double> x, y;
    for (double v = -20.0; v <= 20.0; v += 0.25) {
      x.push_back(v);
      y.push_back(truth(v));
    }
    const auto f = fit_lorentzians(x, y);
    CHECK(f.converged);
    CHECK(f.peaks == 2);
    CHECK(f.center[0] == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(f.center[1] == doctest::Approx(4.5).epsilon(1e-6));
    CHECK(f.separation == doctest::Approx(7.5).epsilon(1e-6));
    CHECK(f.width[1] == doctest::Approx(1.4).epsilon(1e-6));
  }
  SUBCASE("one Lorentzian") {
    std::vector<double> x, y;
    for (double v = -10.0; v <= 10.0; v += 0.2) {
      x.push_back(v);
      y.push_back(0.5 / (1.0 + 4.0 * (v - 1.0) * (v - 1.0)));
    }
    const auto f = fit_lorentzians(x, y);
    CHECK(f.peaks == 1);
    CHECK(f.separation == 0.0);
    CHECK(f.center[0] == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("weak line beside a noisy strong one") {
    PeakFit truth;
    truth.peaks = 2;
    truth.center = {-3.3, 0.3};
    truth.width = {0.5, 0.5};
    truth.amplitude = {0.04, 0.46};
    std::mt19937_64 rng(3);
    std::vector<double> x, y;
    for (int k = -400; k <= 400; ++k) {
      x.push_back(k * 0.02);
      y.push_back(sample_probability(truth(x.back()), 500, rng));
    }
    const auto f = fit_lorentzians(x, y);
    CHECK(f.converged);
    CHECK(f.peaks == 2);
    CHECK(f.separation == doctest::Approx(3.6).epsilon(0.05));
  }
  SUBCASE("flat data is flagged, not thrown") {
    std::vector<double> x(20), y(20, 0.3);
    for (std::size_t k = 0; k < 20; ++k) x[k] = double(k);
    const auto f = fit_lorentzians(x, y);
    CHECK(!f.converged);
  }
  SUBCASE("local maxima tie toward lower x") {
    const std::vector<double> y{0.0, 1.0, 0.0, 1.0, 0.0, 0.5, 0.0};
    const auto m = local_maxima(y);
    REQUIRE(m.size() == 3);
    CHECK(m[0] == 1);
    CHECK(m[1] == 3);
  }
  SUBCASE("scalar and line fits") {
    const auto s = fit_scalar([](double p, std::vector<double>& r) {
      r[0] = p - 3.0;
      r[1] = 2.0 * (p - 3.0);
    }, 2, 0.0, 10.0);
    CHECK(s.value == doctest::Approx(3.0).epsilon(1e-9));
    const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9}, sig{1, 1, 1, 1, 1};
    const auto l = weighted_line_fit(x, y, sig);
    CHECK(l.ok);
    CHECK(l.slope == doctest::Approx(2.0));
    CHECK(l.intercept == doctest::Approx(1.0));
    CHECK(l.slope_error == doctest::Approx(std::sqrt(1.0 / 10.0)));
  }
}

TEST_CASE("avoided crossing scan") {
  const auto cfg = fixtures::ca40_trap();
  const ModePair xz{Axis::x, Axis::z};
  const double base = cfg.omega[0] - cfg.omega[2];
  for (double khz : {1.0, 2.0, 5.0, 10.0}) {
    const double g = angular(khz * 1e3);
    auto pulse = fixtures::exchange_pulse(cfg, xz, g, 1e-3);
    std::vector<double> drive, probe;
    for (int k = -6; k <= 6; ++k) drive.push_back(base + k * 0.5 * g);
    for (int k = -300; k <= 300; ++k) probe.push_back(k * 0.02 * g);
    SpectrumOptions opt;
    opt.linewidth = angular(1e3) * std::min(1.0, khz / 2.0);
    const auto scan = avoided_crossing_scan(cfg, pulse, xz, drive, probe, opt);
    const auto* sep = scan.find("min_separation");
    REQUIRE(sep != nullptr);
    CHECK(sep->ok);
    CHECK(sep->value == doctest::Approx(2.0 * g).epsilon(0.05));
    for (std::size_t r = 0; r < scan.axis.size(); ++r) {
      CHECK(scan.peaks[r].converged);
      CHECK(scan.peaks[r].separation == doctest::Approx(scan.reference[r]).epsilon(0.05));
    }
    CHECK(std::abs(scan.axis[6]) < 1e-6 * g);
    CHECK(scan.peaks[6].separation == doctest::Approx(2.0 * g).epsilon(0.05));
  }
  SUBCASE("no coupling gives one line") {
    auto pulse = fixtures::exchange_pulse(cfg, xz, angular(2e3), 1e-3);
    pulse.amplitude = 0.0;
    std::vector<double> probe;
    for (int k = -100; k <= 100; ++k) probe.push_back(k * angular(100.0));
    const auto scan = avoided_crossing_scan(cfg, pulse, xz, {base}, probe);
    CHECK(scan.peaks[0].peaks == 1);
    CHECK(scan.peaks[0].separation == 0.0);
    CHECK(std::abs(scan.peaks[0].center[0]) < angular(10.0));
  }
  SUBCASE("shot noise is reproducible and order independent") {
    auto pulse = fixtures::exchange_pulse(cfg, xz, angular(5e3), 1e-3);
    std::vector<double> probe;
    for (int k = -200; k <= 200; ++k) probe.push_back(k * angular(100.0));
    SpectrumOptions opt;
    opt.shots = 100;
    opt.seed = 42;
    const std::vector<double> drive{base - angular(2e3), base, base + angular(2e3)};
    const auto a = avoided_crossing_scan(cfg, pulse, xz, drive, probe, opt);
    const auto b = avoided_crossing_scan(cfg, pulse, xz, drive, probe, opt);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    const auto c = avoided_crossing_scan(cfg, pulse, xz, {base}, probe, opt);
    CHECK((c.values.row(0) - a.values.row(1)).cwiseAbs().maxCoeff() == 0.0);
    opt.seed = 43;
    const auto d = avoided_crossing_scan(cfg, pulse, xz, drive, probe, opt);
    CHECK((d.values - a.values).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("thermal probe state gives the same lines") {
    const double g = angular(5e3);
    auto pulse = fixtures::exchange_pulse(cfg, xz, g, 1e-3);
    std::vector<double> probe;
    for (int k = -300; k <= 300; ++k) probe.push_back(k * 0.02 * g);
    SpectrumOptions opt;
    opt.nbar_i = 0.5;
    opt.nbar_j = 0.3;
    const auto scan = avoided_crossing_scan(cfg, pulse, xz, {base + g}, probe, opt);
    CHECK(scan.peaks[0].separation == doctest::Approx(scan.reference[0]).epsilon(0.02));
  }
}

TEST_CASE("Bessel characterization scan") {
  const auto cfg = fixtures::bessel_trap();
  DrivePulse pulse;
  pulse.frequency = fixtures::bessel_drive_frequency();
  pulse.duration = 1e-3;
  // amplitudes that take kA from 0 to about 5
  DrivePulse unit = pulse;
  unit.amplitude = 1.0;
  const double ka_per_volt = cfg.laser_wavenumber * projected_driven_amplitude(cfg, unit);
  std::vector<double> amps;
  for (int k = 0; k <= 25; ++k) amps.push_back(k * 0.2 / ka_per_volt);
  const auto scan = bessel_characterization_scan(cfg, pulse, amps);
  CHECK(scan.values(0, 2) == 1.0);
  CHECK(scan.values(0, 3) == 0.0);
  for (Eigen::Index r = 0; r < scan.values.rows(); ++r) {
    const double ka = scan.values(r, 1);
    CHECK(std::abs(scan.values(r, 2) - std::abs(bessel_oracle(0, ka))) < 1e-10);
    CHECK(std::abs(scan.values(r, 3) - std::abs(bessel_oracle(1, ka))) < 1e-10);
  }
  const auto* s = scan.find("a_per_g");
  REQUIRE(s != nullptr);
  CHECK(s->ok);
  CHECK(s->value == doctest::Approx(fixtures::published_a_per_g).epsilon(1e-6));

  BesselScanOptions noisy;
  noisy.rabi_noise = 0.02;
  noisy.seed = 3;
  const auto n = bessel_characterization_scan(cfg, pulse, amps, noisy);
  CHECK(n.find("a_per_g")->value == doctest::Approx(fixtures::published_a_per_g).epsilon(0.02));
  CHECK(n.find("a_per_g")->error > 0.0);

  auto resonant = pulse;
  resonant.frequency = cfg.omega[2];
  CHECK_THROWS_AS(bessel_characterization_scan(cfg, resonant, amps), ValidationError);
}
