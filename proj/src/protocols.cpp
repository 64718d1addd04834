#include "modecouple/protocols.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "modecouple/constants.hpp"
#include "modecouple/errors.hpp"
#include "modecouple/hamiltonian.hpp"

namespace modecouple {

namespace {

Snapshot snapshot_of(const std::string& label, double time, const TwoModeState& s) {
  Snapshot out;
  out.label = label;
  out.time = time;
  out.populations_i = partial_trace(s, Mode::i).diagonal().real();
  out.populations_j = partial_trace(s, Mode::j).diagonal().real();
  out.n_i = mean_occupation(s, Mode::i);
  out.n_j = mean_occupation(s, Mode::j);
  out.trace = s.norm();
  return out;
}

Snapshot snapshot_of(const std::string& label, double time, const BlockDensity& rho) {
  Snapshot out;
  out.label = label;
  out.time = time;
  out.populations_i = rho.marginal(Mode::i);
  out.populations_j = rho.marginal(Mode::j);
  const auto mean = [](const RealVector& p) {
    double m = 0.0;
    for (Eigen::Index n = 0; n < p.size(); ++n) m += double(n) * p(n);
    return m;
  };
  out.n_i = mean(out.populations_i);
  out.n_j = mean(out.populations_j);
  out.trace = rho.trace();
  return out;
}

std::vector<double> grid(double t1, std::size_t samples) {
  const std::size_t n = std::max<std::size_t>(samples, 2);
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = t1 * double(k) / double(n - 1);
  t.back() = t1;
  return t;
}

// Block-diagonal two-mode state driven by exchange pulses, heated by the
// noise model and cooled by replacement.
class PairEngine {
 public:
  PairEngine(const TrapConfig& cfg, ModePair modes, const NoiseModel& noise, ModeDim di,
             ModeDim dj)
      : cfg_(cfg),
        modes_(modes),
        rate_{noise.rate(modes.first), noise.rate(modes.second)},
        space_(std::make_shared<const SectorSpace>(di, dj, 1)),
        diss_(space_, heating_pair(rate_[0], rate_[1]), 1.0) {}

  void prepare(const RealVector& p_i, const RealVector& p_j) {
    rho_ = BlockDensity::product(space_, p_i, p_j);
  }
  void prepare(double nbar_i, double nbar_j) {
    prepare(thermal_populations(nbar_i, space_->dim_i()),
            thermal_populations(nbar_j, space_->dim_j()));
  }

  void idle(double duration) {
    if (duration <= 0.0) return;
    clock_ += duration;
    if (diss_.empty()) return;
    // Heating keeps product diagonal states in that form.
    if (rho_.is_product_diagonal(1e-13)) {
      const double tr = rho_.trace();
      prepare(heat_populations(rho_.marginal(Mode::i), rate_[0], duration),
              heat_populations(rho_.marginal(Mode::j) / tr, rate_[1], duration));
    } else {
      diss_.evolve(rho_, duration);
    }
    check();
  }

  void pulse(const DrivePulse& p) {
    HamiltonianOptions ho;
    ho.dim_i = space_->dim_i();
    ho.dim_j = space_->dim_j();
    const Hamiltonian h = build_hamiltonian(cfg_, p, modes_, exchange_frame(cfg_, p, modes_), ho);
    const SectorPropagator prop(h, space_);
    // Exchange commutes with equal heating on both modes; only the rate
    // difference limits the piece length, g * piece <= 0.5 keeps the
    // splitting error near 1e-6 quanta.
    const double g = std::abs(coupling_rate(cfg_, p, modes_));
    const double piece = g > 0.0 ? 0.5 / g : p.duration;
    evolve_split(rho_, prop, diss_, 0.0, p.duration, diss_.empty() ? p.duration : piece);
    clock_ += p.duration;
    check();
  }

  // Cooling channel on mode m for `duration`: the other mode heats, then
  // m is traced out and replaced by thermal(nbar).
  void cool(Mode m, double nbar, double duration) {
    const Mode o = m == Mode::i ? Mode::j : Mode::i;
    const RealVector po =
        heat_populations(rho_.marginal(o), rate_[o == Mode::i ? 0 : 1], std::max(duration, 0.0));
    const RealVector pm =
        thermal_populations(nbar, m == Mode::i ? space_->dim_i() : space_->dim_j());
    if (m == Mode::i)
      prepare(pm, po);
    else
      prepare(po, pm);
    clock_ += std::max(duration, 0.0);
    check();
  }

  Snapshot snapshot(const std::string& label) const { return snapshot_of(label, clock_, rho_); }
  const BlockDensity& state() const { return rho_; }
  double clock() const { return clock_; }

 private:
  void check() const {
    for (Mode m : {Mode::i, Mode::j}) {
      const RealVector p = rho_.marginal(m);
      if (p(p.size() - 1) > 1e-5)
        throw TruncationError("protocol: population reaches the Fock cutoff of mode " +
                              std::string(to_string(m == Mode::i ? modes_.first : modes_.second)));
    }
  }

  TrapConfig cfg_;
  ModePair modes_;
  std::array<double, 2> rate_;
  SpacePtr space_;
  BlockDissipator diss_;
  BlockDensity rho_;
  double clock_ = 0.0;
};

double max_rate(const NoiseModel& noise, ModePair modes) {
  return std::max(noise.rate(modes.first), noise.rate(modes.second));
}

ModeDim cooling_dim(std::size_t fixed, double nbar) {
  return ModeDim(fixed ? fixed : protocol_cutoff(nbar, 1e-5));
}

void check_pair(ModePair modes) {
  if (modes.first == modes.second) throw ValidationError("modes: the two axes must differ");
}

}  // namespace

// ------------------------------------------------------------- bookkeeping

const FittedValue* ProtocolResult::find(const std::string& name) const {
  for (const auto& f : fitted)
    if (f.name == name) return &f;
  return nullptr;
}

std::string config_hash(const TrapConfig& cfg, const NoiseModel& noise) {
  std::string text;
  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    text += buf;
  };
  put(cfg.mass);
  put(cfg.charge);
  for (double w : cfg.omega) put(w);
  for (const auto& row : cfg.curvature)
    for (double d : row) put(d);
  for (const auto& row : cfg.curvature_sign)
    for (int s : row) put(s);
  for (double d : cfg.linear) put(d);
  for (double c : cfg.laser_projection) put(c);
  put(cfg.laser_wavenumber);
  for (double r : noise.heating_rate) put(r);
  put(noise.cooling_target);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

EnvelopeKind default_envelope(ModePair modes) {
  const bool xy = (modes.first == Axis::x && modes.second == Axis::y) ||
                  (modes.first == Axis::y && modes.second == Axis::x);
  return xy ? EnvelopeKind::rectangular : EnvelopeKind::blackman;
}

DrivePulse swap_pulse(const TrapConfig& cfg, ModePair modes, double g, EnvelopeKind kind,
                      double frequency_offset) {
  check_pair(modes);
  const double diff = std::abs(cfg.frequency(modes.first) - cfg.frequency(modes.second));
  return DrivePulse::equal_area(amplitude_for_coupling(cfg, modes, g), diff + frequency_offset,
                                kind, swap_time(g));
}

Frame exchange_frame(const TrapConfig& cfg, const DrivePulse& pulse, ModePair modes) {
  const double delta = difference_detuning(cfg, pulse, modes);
  return delta == 0.0 ? Frame::difference() : Frame::detuned(delta);
}

double transfer_fidelity(double n_i_final, double n_j_initial) {
  return 1.0 - std::abs(n_i_final - n_j_initial) / std::max(n_j_initial, 1.0);
}

std::size_t protocol_cutoff(double n_bar, double tail) {
  if (!(n_bar >= 0.0)) throw ValidationError("occupation must be >= 0");
  if (!(tail > 0.0 && tail < 1.0)) throw ValidationError("tail must lie in (0, 1)");
  if (n_bar == 0.0) return 2;
  const double r = n_bar / (n_bar + 1.0);
  const auto d = static_cast<std::size_t>(std::ceil(std::log(tail) / std::log(r)));
  return std::max({d, thermal_cutoff(n_bar), std::size_t(2)});
}

// -------------------------------------------------------------------- SWAP

SwapOutcome swap(const TwoModeState& state, const TrapConfig& cfg, const DrivePulse& pulse,
                 ModePair modes, const SwapOptions& opt) {
  cfg.validate();
  pulse.validate();
  check_pair(modes);
  HamiltonianOptions ho;
  ho.dim_i = state.dim_i();
  ho.dim_j = state.dim_j();
  const Frame frame = opt.full_frame ? Frame::full() : exchange_frame(cfg, pulse, modes);
  const Hamiltonian h = build_hamiltonian(cfg, pulse, modes, frame, ho);
  const auto times = grid(pulse.duration, opt.samples);
  const double nj0 = mean_occupation(state, Mode::j);

  std::vector<Snapshot> trace;
  std::optional<TwoModeState> final_state;
  std::optional<BlockDensity> block;
  auto space = std::make_shared<const SectorSpace>(ho.dim_i, ho.dim_j, 1);
  if (!opt.full_frame && !state.is_pure()) {
    try {
      block = BlockDensity::from_state(space, state);
    } catch (const ValidationError&) {
      block.reset();
    }
  }

  if (block) {
    const SectorPropagator prop(h, space);
    trace.push_back(snapshot_of("swap", 0.0, *block));
    for (std::size_t k = 1; k < times.size(); ++k) {
      prop.unitary(times[k - 1], times[k]).apply(*block);
      trace.push_back(snapshot_of("swap", times[k], *block));
    }
    final_state = block->to_state();
  } else {
    TwoModeState cur = state;
    trace.push_back(snapshot_of("swap", 0.0, cur));
    for (std::size_t k = 1; k < times.size(); ++k) {
      const TimeSpan span{times[k - 1], times[k]};
      EvolutionReport rep = cur.is_pure() ? evolve_schrodinger(cur, h, span, opt.evolution)
                                          : evolve_closed_mixed(cur, h, span, opt.evolution);
      if (!rep.ok) throw NumericalError("swap: " + rep.message);
      cur = std::move(rep.final_state);
      trace.push_back(snapshot_of("swap", times[k], cur));
    }
    final_state = std::move(cur);
  }
  const double fidelity = transfer_fidelity(trace.back().n_i, nj0);
  return SwapOutcome{std::move(*final_state), fidelity, std::move(trace)};
}

// ----------------------------------------------------------------- cooling

const char* to_string(SwapPlacement p) noexcept {
  return p == SwapPlacement::interleaved ? "interleaved" : "single_final";
}

SwapPlacement swap_placement_from_string(const std::string& name) {
  if (name == "interleaved") return SwapPlacement::interleaved;
  if (name == "single_final") return SwapPlacement::single_final;
  throw ValidationError("unknown swap placement '" + name + "'");
}

void CoolingSchedule::validate() const {
  if (cycles < 1) throw ValidationError("schedule.cycles: must be >= 1");
  if (!(cooling_target >= 0.0)) throw ValidationError("schedule.cooling_target: must be >= 0");
  if (!(cool_duration >= 0.0)) throw ValidationError("schedule.cool_duration: must be >= 0");
  if (!(post_cool_delay >= 0.0))
    throw ValidationError("schedule.post_cool_delay: must be >= 0");
}

ProtocolResult interleaved_cooling(const CoolingSetup& setup, const CoolingSchedule& schedule,
                                   const TrapConfig& cfg, const NoiseModel& noise) {
  schedule.validate();
  if (schedule.placement != SwapPlacement::interleaved)
    throw ValidationError("schedule.placement: interleaved cooling needs 'interleaved'");
  noise.validate();
  check_pair(setup.modes);
  setup.pulse.validate();

  // Cooling removes what heating adds; two cycles of heating bound the
  // excursion and the engine checks the cutoff after every step.
  const double total =
      2.0 * (schedule.cool_duration + schedule.post_cool_delay + setup.pulse.duration);
  const double top = std::max({setup.initial_nbar_primary, setup.initial_nbar_secondary,
                               schedule.cooling_target}) +
                     max_rate(noise, setup.modes) * total;
  PairEngine eng(cfg, setup.modes, noise, cooling_dim(setup.cutoff_primary, top),
                 cooling_dim(setup.cutoff_secondary, top));
  eng.prepare(setup.initial_nbar_primary, setup.initial_nbar_secondary);

  ProtocolResult out;
  out.protocol = "interleaved_cooling";
  out.modes = setup.modes;
  out.provenance = {config_hash(cfg, noise), 0};
  out.steps.push_back(eng.snapshot("initial"));
  for (int c = 1; c <= schedule.cycles; ++c) {
    eng.cool(Mode::i, schedule.cooling_target, schedule.cool_duration);
    eng.idle(schedule.post_cool_delay);
    out.steps.push_back(eng.snapshot("cool " + std::to_string(c)));
    if (c < schedule.cycles) {
      eng.pulse(setup.pulse);
      out.steps.push_back(eng.snapshot("swap " + std::to_string(c)));
    }
  }
  return out;
}

ProtocolResult single_swap_cooling(const CoolingSetup& setup, double cool_duration,
                                   double post_cool_delay, const TrapConfig& cfg,
                                   const NoiseModel& noise) {
  if (!(cool_duration >= 0.0)) throw ValidationError("cool_duration: must be >= 0");
  if (!(post_cool_delay >= 0.0)) throw ValidationError("post_cool_delay: must be >= 0");
  noise.validate();
  check_pair(setup.modes);
  setup.pulse.validate();

  const double total = cool_duration + post_cool_delay + setup.pulse.duration;
  const double top = std::max({setup.initial_nbar_primary, setup.initial_nbar_secondary,
                               noise.cooling_target}) +
                     max_rate(noise, setup.modes) * total;
  PairEngine eng(cfg, setup.modes, noise, cooling_dim(setup.cutoff_primary, top),
                 cooling_dim(setup.cutoff_secondary, top));
  eng.prepare(setup.initial_nbar_primary, setup.initial_nbar_secondary);

  ProtocolResult out;
  out.protocol = "single_swap_cooling";
  out.modes = setup.modes;
  out.provenance = {config_hash(cfg, noise), 0};
  out.steps.push_back(eng.snapshot("initial"));
  eng.cool(Mode::i, noise.cooling_target, cool_duration);
  eng.idle(post_cool_delay);
  out.steps.push_back(eng.snapshot("cool"));
  eng.pulse(setup.pulse);
  out.steps.push_back(eng.snapshot("swap"));
  return out;
}

// ------------------------------------------------------------ heating rate

const char* to_string(Readout r) noexcept {
  return r == Readout::direct_y ? "direct_y" : "double_swap_via_x";
}

Readout readout_from_string(const std::string& name) {
  if (name == "direct_y") return Readout::direct_y;
  if (name == "double_swap_via_x") return Readout::double_swap_via_x;
  throw ValidationError("unknown readout '" + name + "'");
}

void HeatingExperiment::validate() const {
  check_pair(modes);
  if (waits.size() < 3) throw ValidationError("experiment.waits: need at least 3 points");
  for (double w : waits)
    if (!(w >= 0.0)) throw ValidationError("experiment.waits: times must be >= 0");
  if (shots == 0) throw ValidationError("experiment.shots: must be >= 1");
  if (!(coupling > 0.0)) throw ValidationError("experiment.coupling: must be > 0");
  if (!(rabi_frequency > 0.0)) throw ValidationError("experiment.rabi_frequency: must be > 0");
  if (!(pulse_area > 0.0)) throw ValidationError("experiment.pulse_area: must be > 0");
  if (!(coherence_time > 0.0)) throw ValidationError("experiment.coherence_time: must be > 0");
  if (!(initial_nbar_primary >= 0.0) || !(initial_nbar_secondary >= 0.0))
    throw ValidationError("experiment.initial_nbar: must be >= 0");
  if (!(cool_duration >= 0.0) || !(post_cool_delay >= 0.0))
    throw ValidationError("experiment.cool_duration: must be >= 0");
}

HeatingData heating_probabilities(const TrapConfig& cfg, const NoiseModel& noise,
                                  const HeatingExperiment& exp) {
  exp.validate();
  noise.validate();
  cfg.validate();
  const ModePair modes = exp.modes;
  const DrivePulse pulse = swap_pulse(cfg, modes, exp.coupling, default_envelope(modes));

  // Preparation: a single SWAP leaves the secondary cold.
  CoolingSetup setup;
  setup.modes = modes;
  setup.pulse = pulse;
  setup.initial_nbar_primary = exp.initial_nbar_primary;
  setup.initial_nbar_secondary = exp.initial_nbar_secondary;
  const auto prep = single_swap_cooling(setup, exp.cool_duration, exp.post_cool_delay, cfg, noise);
  const RealVector& sec = prep.final_step().populations_j;

  // The primary is laser cooled again before the wait, which leaves a
  // product state; only the secondary's distribution is carried over.
  const double wmax = *std::max_element(exp.waits.begin(), exp.waits.end());
  const double top = std::max(prep.final_step().n_j, noise.cooling_target) +
                     max_rate(noise, modes) * (wmax + pulse.duration);
  const ModeDim d(protocol_cutoff(top));
  RealVector p_sec = RealVector::Zero(Eigen::Index(d.cutoff));
  const Eigen::Index keep = std::min<Eigen::Index>(p_sec.size(), sec.size());
  p_sec.head(keep) = sec.head(keep);
  p_sec /= p_sec.sum();

  PairEngine eng(cfg, modes, noise, d, d);
  eng.prepare(thermal_populations(noise.cooling_target, d), p_sec);

  HeatingData out;
  out.readout = exp.readout;
  const Axis probed = exp.readout == Readout::direct_y ? modes.second : modes.first;
  const double eta = lamb_dicke(cfg, probed);
  if (!(eta > 0.0)) throw ValidationError("probe: the laser has no projection on the read mode");
  out.probe = LaserProbe::from_trap(cfg, probed, exp.rabi_frequency,
                                    exp.pulse_area / (exp.rabi_frequency * eta));
  out.probe.coherence_time = exp.coherence_time;

  std::vector<std::size_t> order(exp.waits.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return exp.waits[a] < exp.waits[b]; });
  out.waits = exp.waits;
  out.p_red.assign(exp.waits.size(), 0.0);
  out.p_blue.assign(exp.waits.size(), 0.0);
  out.steps.resize(exp.waits.size());
  double now = 0.0;
  for (std::size_t k : order) {
    eng.idle(exp.waits[k] - now);
    now = exp.waits[k];
    Snapshot snap;
    RealVector pops;
    if (exp.readout == Readout::direct_y) {
      snap = snapshot_of("wait", now, eng.state());
      pops = snap.populations_j;
    } else {
      PairEngine back = eng;
      back.pulse(pulse);
      snap = snapshot_of("wait", now, back.state());
      pops = snap.populations_i;
    }
    out.p_red[k] = sideband_excitation(pops, out.probe, Sideband::red, out.probe.pulse_time);
    out.p_blue[k] = sideband_excitation(pops, out.probe, Sideband::blue, out.probe.pulse_time);
    out.steps[k] = std::move(snap);
  }
  return out;
}

namespace {

double thermal_sideband(const LaserProbe& probe, Sideband sb, double nbar) {
  const double n = std::max(nbar, 0.0);
  const ModeDim d(protocol_cutoff(n, 1e-12));
  return sideband_excitation(thermal_populations(n, d), probe, sb, probe.pulse_time);
}

}  // namespace

HeatingFit fit_heating_line(const LaserProbe& probe, const std::vector<double>& waits,
                            const std::vector<double>& red, const std::vector<double>& blue,
                            std::size_t shots) {
  const std::size_t n = waits.size();
  if (red.size() != n || blue.size() != n) throw DimensionError("heating fit: length mismatch");
  if (n < 3) throw ValidationError("heating fit: need at least 3 points");
  if (shots == 0) throw ValidationError("heating fit: shots must be >= 1");

  // Start from sideband-ratio estimates and a weighted line.
  std::vector<double> x, y, s;
  for (std::size_t k = 0; k < n; ++k) {
    const auto e = estimate_nbar(red[k], blue[k], shots);
    if (!e.ok || !std::isfinite(e.error)) continue;
    x.push_back(waits[k]);
    y.push_back(e.value);
    s.push_back(std::max(e.error, 1e-3));
  }
  if (x.size() < 2)
    throw NumericalError("heating fit: sideband ratios saturated at every wait time");
  const double tmax = std::max(*std::max_element(waits.begin(), waits.end()), 1e-12);
  const LineFit line = weighted_line_fit(x, y, s);
  // theta = (n0, rate * tmax)
  Eigen::Vector2d theta(std::max(line.intercept, 0.0), line.slope * tmax);
  if (!line.ok) theta = Eigen::Vector2d(std::max(y.front(), 0.0), 0.0);

  const double ns = double(shots);
  const auto loglik = [&](const Eigen::Vector2d& th) {
    double l = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double nb = th(0) + th(1) * waits[k] / tmax;
      for (int b = 0; b < 2; ++b) {
        const double obs = b ? blue[k] : red[k];
        const double p = std::clamp(
            thermal_sideband(probe, b ? Sideband::blue : Sideband::red, nb), 1e-12, 1.0 - 1e-12);
        l += ns * (obs * std::log(p) + (1.0 - obs) * std::log(1.0 - p));
      }
    }
    return l;
  };

  HeatingFit out;
  Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
  double l0 = loglik(theta);
  for (int it = 0; it < 100; ++it) {
    info.setZero();
    Eigen::Vector2d score = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      const double u = waits[k] / tmax;
      const double nb = theta(0) + theta(1) * u;
      for (int b = 0; b < 2; ++b) {
        const Sideband sb = b ? Sideband::blue : Sideband::red;
        const double obs = b ? blue[k] : red[k];
        const double h = 1e-5 * std::max(1.0, std::abs(nb));
        const double p = std::clamp(thermal_sideband(probe, sb, nb), 1e-12, 1.0 - 1e-12);
        const double dp = (thermal_sideband(probe, sb, nb + h) -
                           thermal_sideband(probe, sb, std::max(nb - h, 0.0))) /
                          (nb + h - std::max(nb - h, 0.0));
        const Eigen::Vector2d j(dp, dp * u);
        const double w = ns / (p * (1.0 - p));
        info += w * j * j.transpose();
        score += w * (obs - p) * j;
      }
    }
    const Eigen::Vector2d step = info.ldlt().solve(score);
    if (!step.allFinite()) {
      out.message = "singular Fisher information";
      break;
    }
    double scale = 1.0;
    Eigen::Vector2d next = theta + step;
    double l1 = loglik(next);
    while (l1 < l0 - 1e-9 * std::abs(l0) && scale > 1e-4) {
      scale *= 0.5;
      next = theta + scale * step;
      l1 = loglik(next);
    }
    theta = next;
    l0 = l1;
    out.iterations = it + 1;
    if (scale * step.cwiseAbs().maxCoeff() < 1e-10 * (1.0 + theta.cwiseAbs().maxCoeff())) {
      out.ok = true;
      break;
    }
  }
  const Eigen::Matrix2d cov = info.inverse();
  out.initial_nbar = theta(0);
  out.rate = theta(1) / tmax;
  out.initial_error = std::sqrt(std::max(cov(0, 0), 0.0));
  out.rate_error = std::sqrt(std::max(cov(1, 1), 0.0)) / tmax;
  if (!cov.allFinite()) {
    out.ok = false;
    out.message = "singular Fisher information";
  } else if (!out.ok && out.message.empty()) {
    out.message = "Fisher scoring did not converge";
  }
  return out;
}

ProtocolResult sample_heating(const HeatingData& data, std::size_t shots, std::uint64_t seed) {
  const std::size_t n = data.waits.size();
  std::vector<double> red(n), blue(n);
  ProtocolResult out;
  out.protocol = "heating_rate";
  out.steps = data.steps;
  out.provenance.seed = seed;
  const auto err = [&](double p) {
    return std::sqrt(std::max(p * (1.0 - p), 1.0 / double(shots)) / double(shots));
  };
  for (std::size_t k = 0; k < n; ++k) {
    auto rng = point_rng(seed, k);
    red[k] = sample_probability(data.p_red[k], shots, rng);
    blue[k] = sample_probability(data.p_blue[k], shots, rng);
    const auto e = estimate_nbar(red[k], blue[k], shots);
    auto& m = out.steps[k].measured;
    m.push_back({"p_red", red[k], err(red[k]), true});
    m.push_back({"p_blue", blue[k], err(blue[k]), true});
    m.push_back({"nbar", e.value, e.error, e.ok});
  }
  const HeatingFit fit = fit_heating_line(data.probe, data.waits, red, blue, shots);
  out.fitted.push_back({"heating_rate", fit.rate, fit.rate_error, fit.ok});
  out.fitted.push_back({"initial_nbar", fit.initial_nbar, fit.initial_error, fit.ok});
  return out;
}

ProtocolResult heating_rate_experiment(const TrapConfig& cfg, const NoiseModel& noise,
                                       const HeatingExperiment& exp) {
  const HeatingData data = heating_probabilities(cfg, noise, exp);
  ProtocolResult out = sample_heating(data, exp.shots, exp.seed);
  out.modes = exp.modes;
  out.provenance.config_hash = config_hash(cfg, noise);
  return out;
}

// --------------------------------------------------------------- squeezing

ProtocolResult squeeze_experiment(const TrapConfig& cfg, const DrivePulse& pulse,
                                  ModePair modes, const std::vector<double>& times,
                                  std::size_t cutoff) {
  cfg.validate();
  check_pair(modes);
  if (times.empty()) throw ValidationError("experiment.times: empty grid");
  double tmax = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw ValidationError("experiment.times: times must be >= 0");
    tmax = std::max(tmax, t);
  }
  const double g = std::abs(coupling_rate(cfg, pulse, modes));
  if (cutoff == 0) {
    const double s = std::sinh(g * tmax);
    cutoff = protocol_cutoff(s * s, 1e-11) + 2;
  }
  ProtocolResult out;
  out.protocol = "squeeze";
  out.modes = modes;
  out.provenance = {config_hash(cfg, NoiseModel{}), 0};
  const double theta = squeezing_angle(pulse.phase);
  for (double t : times) {
    const auto obs = squeeze_evolution(g, t, cutoff, pulse.phase);
    Snapshot snap = snapshot_of("squeeze", t, obs.state);
    snap.measured.push_back(
        {"witness", joint_quadrature_variance(obs.state, theta), 0.0, true});
    snap.measured.push_back({"correlation", std::abs(obs.correlation), 0.0, true});
    out.steps.push_back(std::move(snap));
  }
  return out;
}

}  // namespace modecouple
