#include "modecouple/hamiltonian.hpp"

#include <cmath>
#include <random>

#include "modecouple/errors.hpp"

namespace modecouple {

// --------------------------------------------------------------- BandFactor

double BandFactor::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

Matrix BandFactor::dense() const {
  const auto n = static_cast<Eigen::Index>(dim());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = k + offset;
    if (r >= 0 && r < n) m(r, k) = values[static_cast<std::size_t>(k)];
  }
  return m;
}

namespace {

BandFactor band(ModeDim d, int offset, auto&& value_of) {
  BandFactor f;
  f.offset = offset;
  f.values.resize(d.cutoff);
  const auto n = static_cast<long>(d.cutoff);
  for (long k = 0; k < n; ++k) {
    const long r = k + offset;
    f.values[static_cast<std::size_t>(k)] =
        (r >= 0 && r < n) ? value_of(static_cast<double>(k)) : 0.0;
  }
  return f;
}

}  // namespace

BandFactor BandFactor::identity(ModeDim d) {
  return band(d, 0, [](double) { return 1.0; });
}
BandFactor BandFactor::annihilate(ModeDim d) {
  return band(d, -1, [](double n) { return std::sqrt(n); });
}
BandFactor BandFactor::create(ModeDim d) {
  return band(d, 1, [](double n) { return std::sqrt(n + 1.0); });
}
BandFactor BandFactor::number(ModeDim d) {
  return band(d, 0, [](double n) { return n; });
}
BandFactor BandFactor::annihilate_squared(ModeDim d) {
  return band(d, -2, [](double n) { return std::sqrt(n * (n - 1.0)); });
}
BandFactor BandFactor::create_squared(ModeDim d) {
  return band(d, 2, [](double n) { return std::sqrt((n + 1.0) * (n + 2.0)); });
}

// --------------------------------------------------------------------- Term

cplx Term::coefficient(double t) const {
  cplx c = 0.0;
  for (const auto& tone : tones)
    c += tone.frequency == 0.0
             ? tone.amplitude
             : tone.amplitude * std::polar(1.0, tone.frequency * t);
  if (envelope) c *= (*envelope)(t);
  return c;
}

double Term::max_coefficient() const {
  double m = 0.0;
  for (const auto& tone : tones) m += std::abs(tone.amplitude);
  return m;  // envelopes peak at 1
}

// -------------------------------------------------------------- Hamiltonian

void Hamiltonian::add(Term term) {
  if (term.on_i.dim() != di_.cutoff || term.on_j.dim() != dj_.cutoff) {
    throw DimensionError("Hamiltonian term does not match mode cutoffs");
  }
  terms_.push_back(std::move(term));
}

Matrix Hamiltonian::dense(double t) const {
  const auto n = static_cast<Eigen::Index>(size());
  Matrix h = Matrix::Zero(n, n);
  for (const auto& term : terms_) {
    const cplx c = term.coefficient(t);
    if (c == cplx(0.0)) continue;
    h += c * kron(term.on_i.dense(), term.on_j.dense());
  }
  return h;
}

std::vector<kernels::BandTerm> Hamiltonian::band_terms(double t) const {
  std::vector<cplx> coefs;
  coefs.reserve(terms_.size());
  for (const auto& term : terms_) coefs.push_back(term.coefficient(t));
  return band_terms(coefs);
}

std::vector<kernels::BandTerm> Hamiltonian::band_terms(
    const std::vector<cplx>& coefs) const {
  std::vector<kernels::BandTerm> out;
  out.reserve(terms_.size());
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    if (coefs[k] == cplx(0.0)) continue;
    const auto& term = terms_[k];
    out.push_back({coefs[k], term.on_i.offset, term.on_i.values.data(),
                   term.on_j.offset, term.on_j.values.data()});
  }
  return out;
}

void Hamiltonian::apply(double t, const Vector& x, Vector& y) const {
  y.resize(x.size());
  const auto bt = band_terms(t);
  kernels::omp::apply(bt, {di_.cutoff, dj_.cutoff}, x.data(), y.data());
}

double Hamiltonian::norm_bound() const {
  double n = 0.0;
  for (const auto& term : terms_)
    n += term.max_coefficient() * term.on_i.max_abs() * term.on_j.max_abs();
  return n;
}

double Hamiltonian::max_frequency() const {
  double f = 0.0;
  for (const auto& term : terms_)
    for (const auto& tone : term.tones) f = std::max(f, std::abs(tone.frequency));
  return f;
}

std::optional<int> Hamiltonian::conserved_sign() const {
  for (int s : {1, -1}) {
    bool ok = true;
    for (const auto& term : terms_)
      if (term.on_i.offset + s * term.on_j.offset != 0) ok = false;
    if (ok) return s;
  }
  return std::nullopt;
}

std::optional<SingleProfile> Hamiltonian::single_profile(double t0, double t1) const {
  // An envelope equal to 1 across the whole span acts as a constant.
  auto flat_on_span = [&](const std::optional<Envelope>& e) {
    return !e || (e->kind == EnvelopeKind::rectangular && e->start <= t0 &&
                  e->start + e->duration >= t1);
  };
  SingleProfile prof;
  bool have_shape = false;
  for (const auto& term : terms_) {
    cplx w = 0.0;
    for (const auto& tone : term.tones) {
      if (tone.frequency != 0.0) return std::nullopt;
      w += tone.amplitude;
    }
    prof.weights.push_back(w);
    if (flat_on_span(term.envelope)) continue;
    if (!have_shape) {
      prof.envelope = term.envelope;
      have_shape = true;
    } else if (prof.envelope->kind != term.envelope->kind ||
               prof.envelope->duration != term.envelope->duration ||
               prof.envelope->start != term.envelope->start) {
      return std::nullopt;
    }
  }
  if (have_shape) {
    // Terms without a shaped envelope would need f = 1 everywhere.
    for (const auto& term : terms_)
      if (flat_on_span(term.envelope) && term.max_coefficient() != 0.0)
        return std::nullopt;
  }
  return prof;
}

double Hamiltonian::hermiticity_defect(double t) const {
  const auto n = static_cast<Eigen::Index>(size());
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  Vector x(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k) = cplx(nd(rng), nd(rng));
    y(k) = cplx(nd(rng), nd(rng));
  }
  Vector hx, hy;
  apply(t, x, hx);
  apply(t, y, hy);
  const cplx lhs = y.dot(hx);  // <y|H x>
  const cplx rhs = hy.dot(x);  // <H y|x>
  const double scale = std::max(1.0, norm_bound()) * x.norm() * y.norm();
  return std::abs(lhs - rhs) / scale;
}

FrameKind frame_kind_from_string(std::string_view name) {
  if (name == "full" || name == "full_lab_interaction") return FrameKind::full_lab_interaction;
  if (name == "rwa_difference") return FrameKind::rwa_difference;
  if (name == "rwa_sum") return FrameKind::rwa_sum;
  if (name == "rwa_detuned") return FrameKind::rwa_detuned;
  throw ValidationError("unknown frame '" + std::string(name) + "'");
}

// ------------------------------------------------------------------ builder

namespace {

Term make_term(std::vector<Tone> tones, const std::optional<Envelope>& env,
               BandFactor a, BandFactor b) {
  return Term{std::move(tones), env, std::move(a), std::move(b)};
}

}  // namespace

Hamiltonian build_hamiltonian(const TrapConfig& cfg, const DrivePulse& pulse,
                              ModePair modes, Frame frame,
                              const HamiltonianOptions& opt) {
  if (modes.first == modes.second) throw ValidationError("modes must differ");
  const ModeDim di = opt.dim_i, dj = opt.dim_j;
  Hamiltonian h(di, dj);
  std::optional<Envelope> env;
  if (!opt.continuous_wave) env = pulse.window();

  const double g = coupling_rate(cfg, pulse, modes);
  // Drive phase picked up by the resonant tone of a_i^dagger a_j
  // (or a_i^dagger a_j^dagger in the sum frame).
  const bool i_above = cfg.frequency(modes.first) > cfg.frequency(modes.second);
  const cplx phase = std::polar(
      1.0, (frame.kind == FrameKind::rwa_sum || i_above) ? -pulse.phase : pulse.phase);
  const auto ai = BandFactor::annihilate(di), ci = BandFactor::create(di);
  const auto aj = BandFactor::annihilate(dj), cj = BandFactor::create(dj);
  const auto Ii = BandFactor::identity(di), Ij = BandFactor::identity(dj);

  switch (frame.kind) {
    case FrameKind::rwa_detuned:
      if (frame.detuning != 0.0) {
        h.add(make_term({{frame.detuning / 2.0, 0.0}}, std::nullopt,
                        BandFactor::number(di), Ij));
        h.add(make_term({{-frame.detuning / 2.0, 0.0}}, std::nullopt, Ii,
                        BandFactor::number(dj)));
      }
      [[fallthrough]];
    case FrameKind::rwa_difference:
      if (opt.cross_terms) {
        h.add(make_term({{g * phase, 0.0}}, env, ci, aj));
        h.add(make_term({{g * std::conj(phase), 0.0}}, env, ai, cj));
      }
      return h;
    case FrameKind::rwa_sum:
      if (opt.cross_terms) {
        h.add(make_term({{g * phase, 0.0}}, env, ci, cj));
        h.add(make_term({{g * std::conj(phase), 0.0}}, env, ai, aj));
      }
      return h;
    case FrameKind::full_lab_interaction:
      break;
  }

  // Full interaction frame. The drive 2 cos(w_p t + phi) contributes
  // e^{+i(w_p t + phi)} + e^{-i(w_p t + phi)}.
  const double wi = cfg.frequency(modes.first), wj = cfg.frequency(modes.second);
  const double wp = pulse.frequency;
  const cplx up = std::polar(1.0, pulse.phase), down = std::conj(up);
  auto drive_tones = [&](double amp, double carrier) {
    // amp * 2 cos(w_p t + phi) e^{i carrier t}
    return std::vector<Tone>{{amp * up, carrier + wp}, {amp * down, carrier - wp}};
  };
  auto conj_tones = [](std::vector<Tone> tones) {
    for (auto& t : tones) {
      t.amplitude = std::conj(t.amplitude);
      t.frequency = -t.frequency;
    }
    return tones;
  };
  if (opt.cross_terms && g != 0.0) {
    const auto sum = drive_tones(g, wi + wj);
    const auto diff = drive_tones(g, wi - wj);
    h.add(make_term(sum, env, ci, cj));
    h.add(make_term(conj_tones(sum), env, ai, aj));
    h.add(make_term(diff, env, ci, aj));
    h.add(make_term(conj_tones(diff), env, ai, cj));
  }
  if (opt.single_mode_terms) {
    for (int which = 0; which < 2; ++which) {
      const Axis ax = which == 0 ? modes.first : modes.second;
      const ModeDim d = which == 0 ? di : dj;
      const double gm = modulation_rate(cfg, pulse, ax);
      if (gm == 0.0) continue;
      // gm cos(w_p t + phi) (e^{2 i w t} a+^2 + h.c. + 2 n)
      const double w = cfg.frequency(ax);
      const auto sq = drive_tones(gm / 2.0, 2.0 * w);
      const auto num = drive_tones(gm, 0.0);
      auto place = [&](BandFactor f) {
        return which == 0 ? std::pair{std::move(f), Ij} : std::pair{Ii, std::move(f)};
      };
      auto [c2a, c2b] = place(BandFactor::create_squared(d));
      h.add(make_term(sq, env, c2a, c2b));
      auto [a2a, a2b] = place(BandFactor::annihilate_squared(d));
      h.add(make_term(conj_tones(sq), env, a2a, a2b));
      auto [na, nb] = place(BandFactor::number(d));
      h.add(make_term(num, env, na, nb));
    }
  }
  if (opt.linear_terms) {
    for (int which = 0; which < 2; ++which) {
      const Axis ax = which == 0 ? modes.first : modes.second;
      const ModeDim d = which == 0 ? di : dj;
      const double lam = displacement_rate(cfg, pulse, ax);
      if (lam == 0.0) continue;
      // lam cos(w_p t + phi) (a+ e^{i w t} + h.c.)
      const auto up_tones = drive_tones(lam / 2.0, cfg.frequency(ax));
      if (which == 0) {
        h.add(make_term(up_tones, env, BandFactor::create(d), Ij));
        h.add(make_term(conj_tones(up_tones), env, BandFactor::annihilate(d), Ij));
      } else {
        h.add(make_term(up_tones, env, Ii, BandFactor::create(d)));
        h.add(make_term(conj_tones(up_tones), env, Ii, BandFactor::annihilate(d)));
      }
    }
  }
  return h;
}

Hamiltonian displacement_hamiltonian(const TrapConfig& cfg, const DrivePulse& pulse,
                                     Axis mode, ModeDim dim) {
  const ModeDim spectator(2);
  Hamiltonian h(dim, spectator);
  const double lam = displacement_rate(cfg, pulse, mode);
  if (lam == 0.0) return h;
  const cplx up = std::polar(1.0, pulse.phase);
  const double w = cfg.frequency(mode), wp = pulse.frequency;
  std::vector<Tone> tones{{lam / 2.0 * up, w + wp}, {lam / 2.0 * std::conj(up), w - wp}};
  std::vector<Tone> conj = tones;
  for (auto& t : conj) {
    t.amplitude = std::conj(t.amplitude);
    t.frequency = -t.frequency;
  }
  const auto env = pulse.window();
  h.add(Term{tones, env, BandFactor::create(dim), BandFactor::identity(spectator)});
  h.add(Term{conj, env, BandFactor::annihilate(dim), BandFactor::identity(spectator)});
  return h;
}

}  // namespace modecouple
