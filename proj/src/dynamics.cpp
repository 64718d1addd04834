#include "modecouple/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "modecouple/constants.hpp"
#include "modecouple/errors.hpp"
#include "modecouple/kernels.hpp"
#include "modecouple/sectors.hpp"

namespace modecouple {

namespace {

const double kNode1 = 0.5 - std::sqrt(3.0) / 6.0;
const double kNode2 = 0.5 + std::sqrt(3.0) / 6.0;
const double kWeight1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
const double kWeight2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;

void check_span(TimeSpan span) {
  if (!std::isfinite(span.start) || !std::isfinite(span.end) || span.end < span.start) {
    throw ValidationError("time span must be finite with end >= start");
  }
}

void check_dims(const TwoModeState& s, const Hamiltonian& h) {
  if (s.dim_i().cutoff != h.dim_i().cutoff || s.dim_j().cutoff != h.dim_j().cutoff) {
    throw DimensionError("state and Hamiltonian cutoffs differ");
  }
}

void check_hermitian(const Hamiltonian& h, TimeSpan span, double limit,
                     double* worst = nullptr) {
  double d = 0.0;
  for (double t : {span.start, 0.5 * (span.start + span.end), span.end})
    d = std::max(d, h.hermiticity_defect(t));
  if (worst) *worst = d;
  if (d > limit) {
    throw ValidationError("Hamiltonian is not Hermitian (defect " +
                          std::to_string(d) + ")");
  }
}

long step_count(double length, double norm, double max_phase, double wmax,
                int per_period, long fixed) {
  if (fixed > 0) return fixed;
  double n = std::ceil(length * norm / max_phase);
  if (wmax > 0.0) n = std::max(n, std::ceil(length * wmax * per_period / constants::two_pi));
  return std::max(1L, static_cast<long>(n));
}

// Indices of the steps after which observables are recorded.
std::vector<long> sample_steps(long steps, std::size_t samples) {
  std::vector<long> out{0};
  const std::size_t m = std::max<std::size_t>(samples, 2);
  for (std::size_t s = 1; s < m; ++s)
    out.push_back(static_cast<long>(std::llround(double(s) * double(steps) / double(m - 1))));
  return out;
}

double mean_n(const RealVector& p, std::size_t dj, bool mode_i) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const auto f = static_cast<std::size_t>(k);
    acc += double(mode_i ? f / dj : f % dj) * p(k);
  }
  return acc;
}

// exp(-i A) v where A = sum of band terms (Hermitian). Taylor series.
void expv(const std::vector<kernels::BandTerm>& a, kernels::Shape shape, Vector& v,
          double tol, Vector& term, Vector& tmp) {
  term = v;
  for (int k = 1; k < 80; ++k) {
    tmp.resize(v.size());
    kernels::omp::apply(a, shape, term.data(), tmp.data());
    term = tmp * cplx(0.0, -1.0 / double(k));
    v += term;
    if (term.norm() <= tol * v.norm()) return;
  }
  throw NumericalError("Taylor exponential did not converge; step too large");
}

EvolutionReport blank_report(const TwoModeState& s);

void record(EvolutionReport& rep, double t, const RealVector& p, std::size_t dj) {
  rep.times.push_back(t);
  rep.n_i.push_back(mean_n(p, dj, true));
  rep.n_j.push_back(mean_n(p, dj, false));
}

EvolutionReport magnus_pure(const TwoModeState& state, const Hamiltonian& h,
                            TimeSpan span, const EvolutionOptions& opt) {
  const std::size_t dj = h.dim_j().cutoff;
  const kernels::Shape shape{h.dim_i().cutoff, dj};
  const long n = step_count(span.length(), h.norm_bound(), opt.max_phase,
                            h.max_frequency(), opt.steps_per_period, opt.fixed_steps);
  const double dt = span.length() / double(n);
  const auto marks = sample_steps(n, opt.samples);

  Vector psi = state.vector();
  Vector term, tmp;
  EvolutionReport rep = blank_report(state);
  std::size_t next = 0;
  const std::size_t nt = h.terms().size();
  std::vector<cplx> first(nt), second(nt);
  for (long k = 0; k <= n; ++k) {
    while (next < marks.size() && marks[next] == k) {
      record(rep, span.start + double(k) * dt, psi.cwiseAbs2(), dj);
      ++next;
    }
    if (k == n) break;
    if (!h.empty()) {
      const double t = span.start + double(k) * dt;
      for (std::size_t m = 0; m < nt; ++m) {
        const cplx h1 = h.terms()[m].coefficient(t + kNode1 * dt);
        const cplx h2 = h.terms()[m].coefficient(t + kNode2 * dt);
        first[m] = dt * (kWeight2 * h1 + kWeight1 * h2);
        second[m] = dt * (kWeight1 * h1 + kWeight2 * h2);
      }
      expv(h.band_terms(first), shape, psi, opt.taylor_tolerance, term, tmp);
      expv(h.band_terms(second), shape, psi, opt.taylor_tolerance, term, tmp);
    }
    rep.max_norm_drift = std::max(rep.max_norm_drift, std::abs(psi.squaredNorm() - 1.0));
  }
  rep.steps = n;
  if (rep.max_norm_drift > opt.drift_limit) {
    rep.ok = false;
    rep.message = "norm drift " + std::to_string(rep.max_norm_drift) + " exceeds limit";
    psi.normalize();  // keep the returned state valid; the report is failed
  }
  rep.final_state = TwoModeState::pure(std::move(psi), h.dim_i(), h.dim_j());
  return rep;
}

EvolutionReport blank_report(const TwoModeState& s) {
  return EvolutionReport{s, {}, {}, {}, 0.0, 0.0, 0.0, 0, true, {}};
}

std::vector<double> sample_times(TimeSpan span, std::size_t samples) {
  const std::size_t m = std::max<std::size_t>(samples, 2);
  std::vector<double> t(m);
  for (std::size_t s = 0; s < m; ++s)
    t[s] = span.start + span.length() * double(s) / double(m - 1);
  return t;
}

}  // namespace

void NoiseModel::validate() const {
  for (int k = 0; k < 3; ++k)
    if (!(heating_rate[k] >= 0.0) || !std::isfinite(heating_rate[k]))
      throw ValidationError(std::string("noise.heating_rate.") + to_string(Axis(k)) +
                            ": must be >= 0");
  if (!(cooling_target >= 0.0) || !std::isfinite(cooling_target))
    throw ValidationError("noise.cooling_target: must be >= 0");
}

EvolutionReport evolve_schrodinger(const TwoModeState& state, const Hamiltonian& h,
                                   TimeSpan span, const EvolutionOptions& opt) {
  if (!state.is_pure()) throw ValidationError("evolve_schrodinger needs a pure state");
  check_dims(state, h);
  check_span(span);
  check_hermitian(h, span, opt.hermiticity_limit);

  if (opt.method == Propagation::automatic && opt.fixed_steps == 0) {
    if (const auto sign = h.conserved_sign()) {
      auto space = std::make_shared<const SectorSpace>(h.dim_i(), h.dim_j(), *sign);
      SectorPropagator prop(h, space);
      if (prop.exact()) {
        const auto active = active_sectors(*space, state.vector());
        EvolutionReport rep = blank_report(state);
        Vector psi;
        for (double t : sample_times(span, opt.samples)) {
          psi = state.vector();
          prop.unitary(span.start, t, &active).apply(psi);
          record(rep, t, psi.cwiseAbs2(), h.dim_j().cutoff);
          rep.max_norm_drift =
              std::max(rep.max_norm_drift, std::abs(psi.squaredNorm() - 1.0));
        }
        rep.steps = 1;
        if (rep.max_norm_drift > opt.drift_limit) {
          rep.ok = false;
          rep.message = "norm drift exceeds limit";
          psi.normalize();
        }
        rep.final_state = TwoModeState::pure(std::move(psi), h.dim_i(), h.dim_j());
        return rep;
      }
    }
  }
  return magnus_pure(state, h, span, opt);
}

EvolutionReport evolve_closed_mixed(const TwoModeState& state, const Hamiltonian& h,
                                    TimeSpan span, const EvolutionOptions& opt) {
  if (state.is_pure()) return evolve_schrodinger(state, h, span, opt);
  check_dims(state, h);
  check_span(span);
  check_hermitian(h, span, opt.hermiticity_limit);
  const Matrix& rho = state.matrix();
  const std::size_t dj = h.dim_j().cutoff;

  if (opt.method == Propagation::automatic && opt.fixed_steps == 0) {
    if (const auto sign = h.conserved_sign()) {
      auto space = std::make_shared<const SectorSpace>(h.dim_i(), h.dim_j(), *sign);
      SectorPropagator prop(h, space);
      if (prop.exact()) {
        EvolutionReport rep = blank_report(state);
        Matrix out;
        for (double t : sample_times(span, opt.samples)) {
          out = prop.unitary(span.start, t).apply_dense(rho);
          record(rep, t, out.diagonal().real(), dj);
          rep.max_norm_drift =
              std::max(rep.max_norm_drift, std::abs(out.trace().real() - 1.0));
        }
        rep.steps = 1;
        if (rep.max_norm_drift > opt.drift_limit) {
          rep.ok = false;
          rep.message = "trace drift exceeds limit";
          out /= out.trace().real();
        }
        out = 0.5 * (out + out.adjoint()).eval();
        rep.final_state = TwoModeState::mixed(std::move(out), h.dim_i(), h.dim_j());
        return rep;
      }
    }
  }

  // Ensemble of pure components.
  std::vector<double> weight;
  std::vector<Vector> component;
  const auto n = rho.rows();
  const bool diagonal = (rho - Matrix(rho.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14;
  if (diagonal) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double p = rho(k, k).real();
      if (p <= 1e-14) continue;
      Vector v = Vector::Zero(n);
      v(k) = 1.0;
      weight.push_back(p);
      component.push_back(std::move(v));
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (es.eigenvalues()(k) <= 1e-14) continue;
      weight.push_back(es.eigenvalues()(k));
      component.push_back(es.eigenvectors().col(k));
    }
  }
  double wsum = 0.0;
  for (double w : weight) wsum += w;

  std::vector<std::optional<EvolutionReport>> parts(component.size());
  EvolutionOptions inner = opt;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < component.size(); ++c) {
    parts[c] = evolve_schrodinger(TwoModeState::pure(component[c], h.dim_i(), h.dim_j()),
                                  h, span, inner);
  }
  EvolutionReport rep = blank_report(state);
  Matrix out = Matrix::Zero(n, n);
  rep.times = parts.empty() ? std::vector<double>{} : parts.front()->times;
  rep.n_i.assign(rep.times.size(), 0.0);
  rep.n_j.assign(rep.times.size(), 0.0);
  for (std::size_t c = 0; c < parts.size(); ++c) {
    const double w = weight[c] / wsum;
    const EvolutionReport& part = *parts[c];
    const Vector& psi = part.final_state.vector();
    out.noalias() += w * psi * psi.adjoint();
    for (std::size_t s = 0; s < rep.times.size(); ++s) {
      rep.n_i[s] += w * part.n_i[s];
      rep.n_j[s] += w * part.n_j[s];
    }
    rep.max_norm_drift = std::max(rep.max_norm_drift, part.max_norm_drift);
    rep.steps += part.steps;
    if (!part.ok) {
      rep.ok = false;
      rep.message = part.message;
    }
  }
  rep.final_state = TwoModeState::mixed(std::move(out), h.dim_i(), h.dim_j());
  return rep;
}

// ---------------------------------------------------------------- Lindblad

std::vector<LindbladChannel> heating_channels(Mode mode, ModeDim dim, double n_dot) {
  if (!(n_dot >= 0.0)) throw ValidationError("heating rate must be >= 0");
  return {{mode, BandFactor::annihilate(dim), n_dot},
          {mode, BandFactor::create(dim), n_dot}};
}

LindbladChannel damping_channel(Mode mode, ModeDim dim, double gamma) {
  if (!(gamma >= 0.0)) throw ValidationError("damping rate must be >= 0");
  return {mode, BandFactor::annihilate(dim), gamma};
}

namespace {

class LindbladGenerator {
 public:
  LindbladGenerator(const Hamiltonian& h, const std::vector<LindbladChannel>& ch)
      : h_(h), channels_(ch), shape_{h.dim_i().cutoff, h.dim_j().cutoff} {
    ones_i_.assign(shape_.dim_i, 1.0);
    ones_j_.assign(shape_.dim_j, 1.0);
    const auto d = static_cast<Eigen::Index>(shape_.size());
    loss_ = RealVector::Zero(d);
    for (const auto& c : channels_) {
      const std::size_t dm = c.mode == Mode::i ? shape_.dim_i : shape_.dim_j;
      if (c.op.dim() != dm) throw DimensionError("channel operator does not match mode");
      if (!(c.rate >= 0.0)) throw ValidationError("channel rate must be >= 0");
      kernels::BandTerm t{};
      t.coef = 1.0;
      if (c.mode == Mode::i) {
        t.offset_i = c.op.offset;
        t.values_i = c.op.values.data();
        t.offset_j = 0;
        t.values_j = ones_j_.data();
      } else {
        t.offset_i = 0;
        t.values_i = ones_i_.data();
        t.offset_j = c.op.offset;
        t.values_j = c.op.values.data();
      }
      jump_.push_back(t);
      // diagonal of L^dagger L
      for (Eigen::Index f = 0; f < d; ++f) {
        const auto flat = static_cast<std::size_t>(f);
        const long n = static_cast<long>(c.mode == Mode::i ? flat / shape_.dim_j
                                                          : flat % shape_.dim_j);
        const long m = n + c.op.offset;
        if (m < 0 || m >= static_cast<long>(dm)) continue;
        const double v = c.op.values[static_cast<std::size_t>(n)];
        loss_(f) += c.rate * v * v;
      }
    }
    rate_bound_ = loss_.size() ? loss_.maxCoeff() : 0.0;
  }

  double rate_bound() const { return rate_bound_; }

  void derivative(double t, const Matrix& rho, Matrix& out) {
    const auto d = rho.rows();
    const std::size_t cols = static_cast<std::size_t>(d);
    work_.resize(d, d);
    out.resize(d, d);
    const auto bt = h_.band_terms(t);
    if (bt.empty()) {
      out.setZero();
    } else {
      kernels::omp::apply_columns(bt, shape_, rho.data(), work_.data(), cols);
      out = cplx(0.0, -1.0) * (work_ - work_.adjoint());
    }
    for (std::size_t k = 0; k < channels_.size(); ++k) {
      const std::span<const kernels::BandTerm> one(&jump_[k], 1);
      kernels::omp::apply_columns(one, shape_, rho.data(), work_.data(), cols);
      adj_ = work_.adjoint();
      kernels::omp::apply_columns(one, shape_, adj_.data(), work_.data(), cols);
      out += channels_[k].rate * work_;
    }
    if (rate_bound_ > 0.0) {
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < d; ++r)
          out(r, c) -= 0.5 * (loss_(r) + loss_(c)) * rho(r, c);
    }
  }

 private:
  const Hamiltonian& h_;
  std::vector<LindbladChannel> channels_;
  kernels::Shape shape_;
  std::vector<double> ones_i_, ones_j_;
  std::vector<kernels::BandTerm> jump_;
  RealVector loss_;
  double rate_bound_ = 0.0;
  Matrix work_, adj_;
};

}  // namespace

EvolutionReport evolve_lindblad(const TwoModeState& state, const Hamiltonian& h,
                                const std::vector<LindbladChannel>& channels,
                                TimeSpan span, const LindbladOptions& opt) {
  if (state.is_pure()) throw ValidationError("evolve_lindblad needs a mixed state");
  check_dims(state, h);
  check_span(span);
  double herm_h = 0.0;
  check_hermitian(h, span, 1e-10, &herm_h);

  LindbladGenerator gen(h, channels);
  long n = step_count(span.length(), h.norm_bound(), opt.max_phase, h.max_frequency(),
                      opt.steps_per_period, opt.fixed_steps);
  if (opt.fixed_steps == 0)
    n = std::max(n, static_cast<long>(std::ceil(span.length() * gen.rate_bound() /
                                                opt.dissipative_step)));
  const double dt = span.length() / double(n);
  const auto marks = sample_steps(n, opt.samples);
  const std::size_t dj = h.dim_j().cutoff;

  Matrix rho = state.matrix();
  Matrix k1, k2, k3, k4, tmp;
  EvolutionReport rep = blank_report(state);
  std::size_t next = 0;
  for (long k = 0; k <= n; ++k) {
    while (next < marks.size() && marks[next] == k) {
      record(rep, span.start + double(k) * dt, rho.diagonal().real(), dj);
      ++next;
    }
    if (k == n) break;
    const double t = span.start + double(k) * dt;
    gen.derivative(t, rho, k1);
    tmp = rho + 0.5 * dt * k1;
    gen.derivative(t + 0.5 * dt, tmp, k2);
    tmp = rho + 0.5 * dt * k2;
    gen.derivative(t + 0.5 * dt, tmp, k3);
    tmp = rho + dt * k3;
    gen.derivative(k + 1 == n ? span.end : t + dt, tmp, k4);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rep.max_norm_drift = std::max(rep.max_norm_drift, std::abs(rho.trace().real() - 1.0));
    rep.max_hermiticity_defect = std::max(
        rep.max_hermiticity_defect, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
  }
  rep.steps = n;
  if (rep.max_norm_drift > opt.drift_limit) {
    rep.ok = false;
    rep.message = "trace drift " + std::to_string(rep.max_norm_drift) + " exceeds limit";
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  auto final_state = TwoModeState::mixed(std::move(rho), h.dim_i(), h.dim_j());
  if (final_state.size() <= opt.positivity_check_max_dim) {
    rep.min_eigenvalue = final_state.min_eigenvalue();
    if (rep.min_eigenvalue < opt.positivity_limit) {
      rep.ok = false;
      rep.message = "negative eigenvalue " + std::to_string(rep.min_eigenvalue);
    }
  }
  rep.final_state = std::move(final_state);
  return rep;
}

// ---------------------------------------------------------------- envelope

DriveSignal::DriveSignal(const DrivePulse& pulse) : pulse_(pulse), window_(pulse.window()) {
  pulse.validate();
}

double DriveSignal::operator()(double t) const {
  return envelope(t) * std::cos(pulse_.frequency * t + pulse_.phase);
}

DriveSignal apply_envelope(const DrivePulse& pulse) { return DriveSignal(pulse); }

namespace {

// alpha(T) = -i int_0^T lam B(t) cos(w_p t + phase) e^{i w t} dt by
// composite 8-point Gauss-Legendre, a quarter period of the fastest
// tone per panel.
cplx coherent_amplitude(double lam, double w, const DrivePulse& pulse) {
  static constexpr double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                  0.9602898564975363};
  static constexpr double wt[4] = {0.3626837833783620, 0.3137066478539537, 0.2223810344533745,
                                   0.1012285362903763};
  const Envelope env = pulse.window();
  const double T = pulse.duration;
  const double fastest = std::abs(w) + std::abs(pulse.frequency) + 2.0 * constants::two_pi / T;
  const auto panels = static_cast<long>(std::ceil(2.0 * T * fastest / constants::pi)) + 4;
  const double h = T / double(panels);
  const auto f = [&](double t) {
    return env(t) * std::cos(pulse.frequency * t + pulse.phase) * std::polar(1.0, w * t);
  };
  cplx sum = 0.0;
  for (long p = 0; p < panels; ++p) {
    const double mid = (double(p) + 0.5) * h;
    for (int k = 0; k < 4; ++k) {
      const double dx = 0.5 * h * x[k];
      sum += wt[k] * (f(mid - dx) + f(mid + dx));
    }
  }
  return cplx(0.0, -1.0) * lam * 0.5 * h * sum;
}

}  // namespace

double residual_excitation(const TrapConfig& cfg, const DrivePulse& pulse, Axis mode,
                           const ResidualOptions& opt) {
  pulse.validate();
  if (opt.method == ResidualMethod::coherent) {
    const double lam = displacement_rate(cfg, pulse, mode);
    if (lam == 0.0) return 0.0;
    return std::norm(coherent_amplitude(lam, cfg.frequency(mode), pulse));
  }
  const ModeDim dim(opt.cutoff);
  const Hamiltonian h = displacement_hamiltonian(cfg, pulse, mode, dim);
  if (h.empty()) return 0.0;
  const auto start = tensor(vacuum(dim), vacuum(ModeDim(2)));
  const auto rep = evolve_schrodinger(start, h, {0.0, pulse.duration}, opt.evolution);
  if (!rep.ok) throw NumericalError("residual excitation run failed: " + rep.message);
  const Matrix rho_i = partial_trace(rep.final_state, Mode::i);
  const double top = rho_i(rho_i.rows() - 1, rho_i.rows() - 1).real();
  if (top > opt.truncation_limit) {
    throw TruncationError("residual excitation reaches the top Fock level; raise cutoff");
  }
  return rep.n_i.back();
}

// --------------------------------------------------------------- squeezing

SqueezeObservables squeeze_evolution(double g, double t, std::size_t cutoff, double phase,
                                     double truncation_limit) {
  const ModeDim d(cutoff);
  Hamiltonian h(d, d);
  const cplx w = g * std::polar(1.0, -phase);
  h.add(Term{{{w, 0.0}}, std::nullopt, BandFactor::create(d), BandFactor::create(d)});
  h.add(Term{{{std::conj(w), 0.0}}, std::nullopt, BandFactor::annihilate(d),
             BandFactor::annihilate(d)});
  const auto start = tensor(vacuum(d), vacuum(d));
  auto rep = evolve_schrodinger(start, h, {0.0, t});
  if (!rep.ok) throw NumericalError("squeezing run failed: " + rep.message);
  SqueezeObservables out{rep.n_i.back(), rep.n_j.back(), 0.0, 0.0, rep.final_state};
  const Vector& psi = rep.final_state.vector();
  const auto top = static_cast<Eigen::Index>(cutoff - 1);
  double p_top = 0.0;
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(cutoff); ++k)
    p_top += std::norm(psi(top * static_cast<Eigen::Index>(cutoff) + k)) +
             std::norm(psi(k * static_cast<Eigen::Index>(cutoff) + top));
  out.top_population = p_top;
  if (p_top > truncation_limit) {
    throw TruncationError("squeezed state reaches the top Fock level; raise cutoff");
  }
  const Matrix a = ModeOperator::annihilate(d).matrix;
  out.correlation = expect_product(rep.final_state, a, a);
  return out;
}

double joint_quadrature_variance(const TwoModeState& state, double theta) {
  const Matrix ai = ModeOperator::annihilate(state.dim_i()).matrix;
  const Matrix aj = ModeOperator::annihilate(state.dim_j()).matrix;
  const auto di = ai.rows(), dj = aj.rows();
  const Matrix Ii = Matrix::Identity(di, di), Ij = Matrix::Identity(dj, dj);
  const cplx m_ai = expect_product(state, ai, Ij);
  const cplx m_aj = expect_product(state, Ii, aj);
  const cplx aii = expect_product(state, ai * ai, Ij);
  const cplx ajj = expect_product(state, Ii, aj * aj);
  const cplx aij = expect_product(state, ai, aj);
  const cplx cross = expect_product(state, ai.adjoint(), aj);  // <a_i^dag a_j>
  const double ni = expect_product(state, ai.adjoint() * ai, Ij).real();
  const double nj = expect_product(state, Ii, aj.adjoint() * aj).real();
  // c = (a_i - a_j)/sqrt(2), X_- = (e^{-i theta} c + h.c.)/sqrt(2)
  const cplx c2 = 0.5 * (aii - 2.0 * aij + ajj);
  const double cdc = 0.5 * (ni + nj - 2.0 * cross.real());
  const cplx rot = std::polar(1.0, -2.0 * theta);
  const double second = 0.5 * (2.0 * (rot * c2).real() + 2.0 * cdc + 1.0);
  const cplx mc = (m_ai - m_aj) / std::sqrt(2.0);
  const double first = std::sqrt(2.0) * (std::polar(1.0, -theta) * mc).real();
  return second - first * first;
}

double squeezing_angle(double drive_phase) { return -(drive_phase + constants::pi / 2.0) / 2.0; }

}  // namespace modecouple
