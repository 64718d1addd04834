#include "modecouple/spectroscopy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "modecouple/bessel.hpp"
#include "modecouple/errors.hpp"
#include "modecouple/hamiltonian.hpp"
#include "modecouple/sectors.hpp"

namespace modecouple {

const char* to_string(Sideband s) noexcept {
  switch (s) {
    case Sideband::red: return "red";
    case Sideband::blue: return "blue";
    case Sideband::carrier: return "carrier";
  }
  return "?";
}

Sideband sideband_from_string(const std::string& name) {
  if (name == "red") return Sideband::red;
  if (name == "blue") return Sideband::blue;
  if (name == "carrier") return Sideband::carrier;
  throw ValidationError("unknown sideband '" + name + "'");
}

void LaserProbe::validate() const {
  if (!(rabi_frequency > 0.0)) throw ValidationError("probe.rabi_frequency: must be > 0");
  for (int k = 0; k < 3; ++k) {
    if (!(lamb_dicke[k] >= 0.0) || !(lamb_dicke[k] < 0.3))
      throw ValidationError(std::string("probe.lamb_dicke.") + to_string(Axis(k)) +
                            ": must lie in [0, 0.3)");
  }
  if (!(pulse_time >= 0.0)) throw ValidationError("probe.pulse_time: must be >= 0");
  if (!(coherence_time > 0.0)) throw ValidationError("probe.coherence_time: must be > 0");
}

LaserProbe LaserProbe::from_trap(const TrapConfig& cfg, Axis mode, double rabi_frequency,
                                 double pulse_time) {
  LaserProbe p;
  p.rabi_frequency = rabi_frequency;
  for (int k = 0; k < 3; ++k) p.lamb_dicke[k] = modecouple::lamb_dicke(cfg, Axis(k));
  p.mode = mode;
  p.pulse_time = pulse_time;
  p.validate();
  return p;
}

double sideband_rabi_frequency(const LaserProbe& probe, Sideband sb, std::size_t n) {
  const double eta = probe.eta();
  const double nn = static_cast<double>(n);
  switch (sb) {
    case Sideband::red: return probe.rabi_frequency * eta * std::sqrt(nn);
    case Sideband::blue: return probe.rabi_frequency * eta * std::sqrt(nn + 1.0);
    case Sideband::carrier: return probe.rabi_frequency * (1.0 - eta * eta * (nn + 0.5));
  }
  return 0.0;
}

double sideband_excitation(const RealVector& populations, const LaserProbe& probe,
                           Sideband sb, double t) {
  probe.validate();
  if (!(t >= 0.0)) throw ValidationError("pulse time must be >= 0");
  const double decay =
      std::isinf(probe.coherence_time) ? 1.0 : std::exp(-t / probe.coherence_time);
  const double d2 = probe.detuning * probe.detuning;
  double p = 0.0;
  for (Eigen::Index n = 0; n < populations.size(); ++n) {
    const double w = populations(n);
    if (w == 0.0) continue;
    const double om = sideband_rabi_frequency(probe, sb, static_cast<std::size_t>(n));
    if (om == 0.0) continue;
    const double o2 = om * om + d2;
    p += w * (om * om / o2) * 0.5 * (1.0 - decay * std::cos(std::sqrt(o2) * t));
  }
  return std::clamp(p, 0.0, 1.0);
}

NbarEstimate estimate_nbar(double p_red, double p_blue, std::size_t shots) {
  NbarEstimate out;
  if (!(p_red >= 0.0) || !(p_blue <= 1.0) || !(p_blue > 0.0)) {
    out.message = "probabilities outside [0, 1]";
    return out;
  }
  if (p_red >= p_blue) {
    out.message = "red >= blue: not a thermal state";
    return out;
  }
  const double r = p_red / p_blue;
  out.value = r / (1.0 - r);
  if (shots > 0) {
    const double n = static_cast<double>(shots);
    const double vr = p_red * (1.0 - p_red) / n;
    const double vb = p_blue * (1.0 - p_blue) / n;
    const double var_r = (vr + r * r * vb) / (p_blue * p_blue);
    out.error = std::sqrt(var_r) / ((1.0 - r) * (1.0 - r));
  }
  out.ok = true;
  return out;
}

const FittedValue* ScanResult::find(const std::string& name) const {
  for (const auto& f : fitted)
    if (f.name == name) return &f;
  return nullptr;
}

std::mt19937_64 point_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double sample_probability(double p, std::size_t shots, std::mt19937_64& rng) {
  if (shots == 0) return p;
  std::binomial_distribution<long> draw(static_cast<long>(shots), std::clamp(p, 0.0, 1.0));
  return static_cast<double>(draw(rng)) / static_cast<double>(shots);
}

namespace {

struct Line {
  double offset;  // rad/s from the bare sideband of mode i
  double weight;
};

// Sideband lines of mode i for a product thermal state under the detuned
// exchange Hamiltonian, from the sector eigensystems. Offsets are shifts of
// the motional frequency of mode i.
std::vector<Line> dressed_lines(double g, double delta, double nbar_i, double nbar_j,
                                Sideband sb) {
  const ModeDim di(thermal_cutoff(nbar_i) + 2), dj(thermal_cutoff(nbar_j) + 2);
  Hamiltonian h(di, dj);
  h.add({{{delta / 2.0, 0.0}}, std::nullopt, BandFactor::number(di), BandFactor::identity(dj)});
  h.add({{{-delta / 2.0, 0.0}}, std::nullopt, BandFactor::identity(di), BandFactor::number(dj)});
  h.add({{{g, 0.0}}, std::nullopt, BandFactor::create(di), BandFactor::annihilate(dj)});
  h.add({{{g, 0.0}}, std::nullopt, BandFactor::annihilate(di), BandFactor::create(dj)});
  const SectorSpace space(di, dj, 1);
  const RealVector pi_ = thermal_populations(nbar_i, di), pj = thermal_populations(nbar_j, dj);
  std::vector<cplx> coefs;
  for (const auto& t : h.terms()) coefs.push_back(t.coefficient(0.0));
  const int step = sb == Sideband::blue ? 1 : -1;

  const auto& secs = space.sectors();
  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eig(secs.size());
  for (std::size_t s = 0; s < secs.size(); ++s) eig[s].compute(space.block(h, s, coefs));

  std::vector<Line> lines;
  for (std::size_t s = 0; s < secs.size(); ++s) {
    const std::size_t to = space.find(secs[s].charge + step);
    if (to == SectorSpace::npos) continue;
    const auto& from = secs[s];
    // a_i or a_i^dagger between the sectors in the product basis
    Matrix op = Matrix::Zero(Eigen::Index(secs[to].states.size()),
                             Eigen::Index(from.states.size()));
    for (std::size_t c = 0; c < from.states.size(); ++c) {
      const std::size_t f = from.states[c];
      const std::size_t ni = f / dj.cutoff, nj = f % dj.cutoff;
      if (step < 0 && ni == 0) continue;
      if (step > 0 && ni + 1 >= di.cutoff) continue;
      const std::size_t nt = step > 0 ? ni + 1 : ni - 1;
      const std::size_t target = nt * dj.cutoff + nj;
      op(Eigen::Index(space.position_of(target)), Eigen::Index(c)) =
          std::sqrt(double(step > 0 ? ni + 1 : ni));
    }
    // The bare product state, dephased in the dressed basis.
    RealVector bare(Eigen::Index(from.states.size()));
    for (std::size_t c = 0; c < from.states.size(); ++c) {
      const std::size_t f = from.states[c];
      bare(Eigen::Index(c)) = pi_(Eigen::Index(f / dj.cutoff)) * pj(Eigen::Index(f % dj.cutoff));
    }
    const Matrix& va = eig[s].eigenvectors();
    const Matrix& vb = eig[to].eigenvectors();
    const Matrix m = vb.adjoint() * op * va;
    for (Eigen::Index u = 0; u < va.cols(); ++u) {
      double pop = 0.0;
      for (Eigen::Index c = 0; c < va.rows(); ++c) pop += std::norm(va(c, u)) * bare(c);
      if (pop < 1e-14) continue;
      for (Eigen::Index l = 0; l < vb.cols(); ++l) {
        const double w = pop * std::norm(m(l, u));
        if (w < 1e-14) continue;
        const double e = step * (eig[to].eigenvalues()(l) - eig[s].eigenvalues()(u));
        lines.push_back({e - delta / 2.0, w});
      }
    }
  }
  return lines;
}

}  // namespace

ScanResult avoided_crossing_scan(const TrapConfig& cfg, const DrivePulse& pulse,
                                 ModePair modes, const std::vector<double>& drive_frequencies,
                                 const std::vector<double>& probe_detunings,
                                 const SpectrumOptions& opt) {
  cfg.validate();
  if (drive_frequencies.empty() || probe_detunings.size() < 8)
    throw ValidationError("crossing scan needs drive points and >= 8 probe points");
  if (!std::is_sorted(probe_detunings.begin(), probe_detunings.end()))
    throw ValidationError("probe detunings must increase");
  if (opt.sideband == Sideband::carrier)
    throw ValidationError("spectrum.sideband: must be red or blue");
  if (!(opt.linewidth > 0.0)) throw ValidationError("spectrum.linewidth: must be > 0");
  if (!(opt.contrast > 0.0 && opt.contrast <= 1.0))
    throw ValidationError("spectrum.contrast: must lie in (0, 1]");

  ScanResult out;
  out.axis_name = "drive_detuning";
  out.probe_name = "probe_detuning";
  out.probe_axis = probe_detunings;
  out.shots = opt.shots;
  out.seed = opt.seed;
  const auto nd = static_cast<Eigen::Index>(drive_frequencies.size());
  const auto np = static_cast<Eigen::Index>(probe_detunings.size());
  out.axis.resize(drive_frequencies.size());
  out.values.resize(nd, np);
  out.errors.resize(nd, np);
  out.peaks.resize(drive_frequencies.size());
  out.reference.resize(drive_frequencies.size());

#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index r = 0; r < nd; ++r) {
    DrivePulse p = pulse;
    p.frequency = drive_frequencies[std::size_t(r)];
    const double g = std::abs(coupling_rate(cfg, p, modes));
    const double delta = difference_detuning(cfg, p, modes);
    out.axis[std::size_t(r)] = delta;
    out.reference[std::size_t(r)] = detuned_splitting(g, delta);
    const auto lines = dressed_lines(g, delta, opt.nbar_i, opt.nbar_j, opt.sideband);
    double total = 0.0;
    for (const auto& l : lines) total += l.weight;
    if (!(total > 0.0)) total = 1.0;  // red sideband of the ground state
    // keyed by the drive frequency so a point's noise does not depend on the scan
    auto rng = point_rng(opt.seed, std::bit_cast<std::uint64_t>(p.frequency));
    std::vector<double> y(static_cast<std::size_t>(np));
    const std::vector<double>& x = probe_detunings;
    for (Eigen::Index c = 0; c < np; ++c) {
      double s = 0.0;
      for (const auto& l : lines) {
        const double u = 2.0 * (probe_detunings[std::size_t(c)] - l.offset) / opt.linewidth;
        s += l.weight / total / (1.0 + u * u);
      }
      const double prob = std::clamp(opt.contrast * s, 0.0, 1.0);
      const double meas = sample_probability(prob, opt.shots, rng);
      out.values(r, c) = meas;
      out.errors(r, c) =
          opt.shots ? std::sqrt(std::max(meas * (1.0 - meas), 1.0 / double(opt.shots)) /
                                double(opt.shots))
                    : 0.0;
      y[std::size_t(c)] = meas;
    }
    out.peaks[std::size_t(r)] = fit_lorentzians(x, y);
  }

  // minimum fitted separation over the scan
  double best = INFINITY;
  bool ok = false;
  for (const auto& f : out.peaks) {
    if (f.converged && f.peaks == 2 && f.separation < best) {
      best = f.separation;
      ok = true;
    }
  }
  out.fitted.push_back({"min_separation", ok ? best : 0.0, 0.0, ok});
  out.fitted.push_back({"coupling_estimate", ok ? best / 2.0 : 0.0, 0.0, ok});
  return out;
}

ScanResult bessel_characterization_scan(const TrapConfig& cfg, const DrivePulse& pulse,
                                        const std::vector<double>& amplitudes,
                                        const BesselScanOptions& opt) {
  cfg.validate();
  if (amplitudes.size() < 3) throw ValidationError("bessel scan needs >= 3 amplitudes");
  if (!(opt.rabi_noise >= 0.0)) throw ValidationError("bessel.rabi_noise: must be >= 0");
  ScanResult out;
  out.axis_name = "amplitude";
  out.axis = amplitudes;
  out.series = {"coupling", "modulation_index", "carrier", "sideband"};
  const auto n = static_cast<Eigen::Index>(amplitudes.size());
  out.values.resize(n, 4);
  out.errors = Eigen::MatrixXd::Zero(n, 4);
  out.seed = opt.seed;

  // driven-motion checks first so guard-band violations propagate
  std::vector<double> g(amplitudes.size()), ka(amplitudes.size());
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    DrivePulse p = pulse;
    p.amplitude = amplitudes[k];
    p.validate();
    g[k] = std::abs(coupling_rate(cfg, p, opt.coupling));
    ka[k] = cfg.laser_wavenumber * projected_driven_amplitude(cfg, p);
  }

#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto k = std::size_t(r);
    auto rng = point_rng(opt.seed, k);
    std::normal_distribution<double> noise(0.0, opt.rabi_noise);
    out.values(r, 0) = g[k];
    out.values(r, 1) = ka[k];
    double c = carrier_suppression(ka[k], 0);
    double s = carrier_suppression(ka[k], 1);
    if (opt.rabi_noise > 0.0) {
      c = std::max(0.0, c * (1.0 + noise(rng)));
      s = std::max(0.0, s * (1.0 + noise(rng)));
    }
    out.values(r, 2) = c;
    out.values(r, 3) = s;
    out.errors(r, 2) = opt.rabi_noise * c;
    out.errors(r, 3) = opt.rabi_noise * s;
  }

  // fit A/g: kA = k * slope * g
  const double gmax = *std::max_element(g.begin(), g.end());
  const double k = cfg.laser_wavenumber;
  auto residuals = [&](double slope, std::vector<double>& res) {
    for (std::size_t m = 0; m < g.size(); ++m) {
      const double x = k * slope * g[m];
      res[2 * m] = std::abs(bessel_j(0, x)) - out.values(Eigen::Index(m), 2);
      res[2 * m + 1] = std::abs(bessel_j(1, x)) - out.values(Eigen::Index(m), 3);
    }
  };
  FittedValue slope{"a_per_g", 0.0, 0.0, false};
  if (gmax > 0.0 && k > 0.0) {
    // kA up to about 12 over the largest coupling
    const auto fit = fit_scalar(residuals, 2 * g.size(), 0.0, 12.0 / (k * gmax));
    slope = {"a_per_g", fit.value, fit.error, fit.converged};
  }
  out.fitted.push_back(slope);
  return out;
}

}  // namespace modecouple
