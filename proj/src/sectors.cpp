#include "modecouple/sectors.hpp"

#include <algorithm>
#include <cmath>

#include "modecouple/constants.hpp"
#include "modecouple/errors.hpp"

namespace modecouple {

namespace {

constexpr double kOffBlockTol = 1e-12;

// Fourth-order commutator-free Magnus coefficients.
const double kNode1 = 0.5 - std::sqrt(3.0) / 6.0;
const double kNode2 = 0.5 + std::sqrt(3.0) / 6.0;
const double kWeight1 = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
const double kWeight2 = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;

std::vector<Eigen::Index> as_index(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

Matrix unitary_from_eig(const Eigen::SelfAdjointEigenSolver<Matrix>& es,
                        double theta) {
  const RealVector& lam = es.eigenvalues();
  Vector phase(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) phase(k) = std::polar(1.0, -lam(k) * theta);
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix expm_hermitian(const Matrix& a) {
  // exp(-i a) for Hermitian a
  if (a.rows() == 1) return Matrix::Constant(1, 1, std::polar(1.0, -a(0, 0).real()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return unitary_from_eig(es, 1.0);
}

}  // namespace

// -------------------------------------------------------------- SectorSpace

SectorSpace::SectorSpace(ModeDim di, ModeDim dj, int sign)
    : di_(di), dj_(dj), sign_(sign) {
  if (sign != 1 && sign != -1) throw ValidationError("sector sign must be +-1");
  const auto ni_max = static_cast<int>(di.cutoff) - 1;
  const auto nj_max = static_cast<int>(dj.cutoff) - 1;
  min_charge_ = sign > 0 ? 0 : -nj_max;
  const int max_charge = sign > 0 ? ni_max + nj_max : ni_max;
  by_charge_.assign(static_cast<std::size_t>(max_charge - min_charge_ + 1), npos);
  sector_of_.resize(size());
  position_of_.resize(size());
  for (std::size_t f = 0; f < size(); ++f) {
    const int ni = static_cast<int>(f / dj.cutoff);
    const int nj = static_cast<int>(f % dj.cutoff);
    const int q = ni + sign * nj;
    auto& slot = by_charge_[static_cast<std::size_t>(q - min_charge_)];
    if (slot == npos) {
      slot = sectors_.size();
      sectors_.push_back({q, {}});
    }
    sector_of_[f] = slot;
    position_of_[f] = sectors_[slot].states.size();
    sectors_[slot].states.push_back(f);
  }
}

std::size_t SectorSpace::find(int charge) const {
  const int k = charge - min_charge_;
  if (k < 0 || k >= static_cast<int>(by_charge_.size())) return npos;
  return by_charge_[static_cast<std::size_t>(k)];
}

std::size_t SectorSpace::largest_sector() const {
  std::size_t m = 0;
  for (const auto& s : sectors_) m = std::max(m, s.states.size());
  return m;
}

Matrix SectorSpace::block(const Hamiltonian& h, std::size_t s,
                          const std::vector<cplx>& coefs) const {
  const auto& states = sectors_[s].states;
  const auto n = static_cast<Eigen::Index>(states.size());
  Matrix m = Matrix::Zero(n, n);
  const auto di = static_cast<long>(di_.cutoff), dj = static_cast<long>(dj_.cutoff);
  const auto& terms = h.terms();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (coefs[k] == cplx(0.0)) continue;
    const auto& t = terms[k];
    for (Eigen::Index p = 0; p < n; ++p) {
      const auto f = static_cast<long>(states[static_cast<std::size_t>(p)]);
      const long ni = f / dj, nj = f % dj;
      const long mi = ni + t.on_i.offset, mj = nj + t.on_j.offset;
      if (mi < 0 || mi >= di || mj < 0 || mj >= dj) continue;
      const double v = t.on_i.values[static_cast<std::size_t>(ni)] *
                       t.on_j.values[static_cast<std::size_t>(nj)];
      if (v == 0.0) continue;
      const auto target = static_cast<std::size_t>(mi * dj + mj);
      if (sector_of_[target] != s) {
        throw ValidationError("Hamiltonian term does not conserve the sector charge");
      }
      m(static_cast<Eigen::Index>(position_of_[target]), p) += coefs[k] * v;
    }
  }
  return m;
}

// ------------------------------------------------------------- BlockDensity

BlockDensity BlockDensity::from_state(SpacePtr space, const TwoModeState& state) {
  if (state.dim_i().cutoff != space->dim_i().cutoff ||
      state.dim_j().cutoff != space->dim_j().cutoff) {
    throw DimensionError("state does not match sector space");
  }
  const TwoModeState mixed = state.to_mixed();
  const Matrix& rho = mixed.matrix();
  const std::size_t n = space->size();
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r)
      if (space->sector_of(r) != space->sector_of(c) &&
          std::abs(rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) >
              kOffBlockTol) {
        throw ValidationError("state has coherence between charge sectors");
      }
  BlockDensity out{space, {}};
  for (const auto& sec : space->sectors()) {
    const auto idx = as_index(sec.states);
    out.blocks.push_back(rho(idx, idx));
  }
  return out;
}

BlockDensity BlockDensity::product(SpacePtr space, const RealVector& p_i,
                                   const RealVector& p_j) {
  const std::size_t dj = space->dim_j().cutoff;
  if (static_cast<std::size_t>(p_i.size()) != space->dim_i().cutoff ||
      static_cast<std::size_t>(p_j.size()) != dj) {
    throw DimensionError("population vectors do not match sector space");
  }
  BlockDensity out{space, {}};
  for (const auto& sec : space->sectors()) {
    const auto n = static_cast<Eigen::Index>(sec.states.size());
    Matrix b = Matrix::Zero(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
      const std::size_t f = sec.states[static_cast<std::size_t>(p)];
      b(p, p) = p_i(static_cast<Eigen::Index>(f / dj)) *
                p_j(static_cast<Eigen::Index>(f % dj));
    }
    out.blocks.push_back(std::move(b));
  }
  return out;
}

TwoModeState BlockDensity::to_state() const {
  const auto n = static_cast<Eigen::Index>(space->size());
  if (static_cast<std::size_t>(n * n) * sizeof(cplx) > memory_budget()) {
    throw DimensionError("dense density matrix exceeds memory budget");
  }
  Matrix rho = Matrix::Zero(n, n);
  const auto& secs = space->sectors();
  for (std::size_t s = 0; s < secs.size(); ++s) {
    const auto idx = as_index(secs[s].states);
    rho(idx, idx) = blocks[s];
  }
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-7) {
    throw NumericalError("block state trace drifted beyond 1e-7");
  }
  rho /= tr;
  return TwoModeState::mixed(std::move(rho), space->dim_i(), space->dim_j());
}

double BlockDensity::trace() const {
  double t = 0.0;
  for (const auto& b : blocks) t += b.trace().real();
  return t;
}

RealVector BlockDensity::populations() const {
  RealVector p = RealVector::Zero(static_cast<Eigen::Index>(space->size()));
  const auto& secs = space->sectors();
  for (std::size_t s = 0; s < secs.size(); ++s)
    for (std::size_t k = 0; k < secs[s].states.size(); ++k)
      p(static_cast<Eigen::Index>(secs[s].states[k])) =
          blocks[s](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
  return p;
}

RealVector BlockDensity::marginal(Mode mode) const {
  const std::size_t dj = space->dim_j().cutoff;
  const std::size_t d = mode == Mode::i ? space->dim_i().cutoff : dj;
  RealVector m = RealVector::Zero(static_cast<Eigen::Index>(d));
  const RealVector p = populations();
  for (std::size_t f = 0; f < space->size(); ++f) {
    const std::size_t n = mode == Mode::i ? f / dj : f % dj;
    m(static_cast<Eigen::Index>(n)) += p(static_cast<Eigen::Index>(f));
  }
  return m;
}

double BlockDensity::mean_occupation(Mode mode) const {
  const RealVector m = marginal(mode);
  double acc = 0.0;
  for (Eigen::Index n = 0; n < m.size(); ++n) acc += double(n) * m(n);
  return acc;
}

double BlockDensity::hermiticity_defect() const {
  double d = 0.0;
  for (const auto& b : blocks) d = std::max(d, (b - b.adjoint()).cwiseAbs().maxCoeff());
  return d;
}

double BlockDensity::min_eigenvalue() const {
  double m = 1.0;
  for (const auto& b : blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

bool BlockDensity::is_product_diagonal(double tol) const {
  const RealVector pi = marginal(Mode::i), pj = marginal(Mode::j);
  const double tr = trace();
  if (!(tr > 0.0)) return false;
  const std::size_t dj = space->dim_j().cutoff;
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    const auto& st = space->sectors()[s].states;
    const Matrix& b = blocks[s];
    for (Eigen::Index c = 0; c < b.cols(); ++c)
      for (Eigen::Index r = 0; r < b.rows(); ++r) {
        const auto f = st[std::size_t(r)];
        const double want =
            r == c ? pi(Eigen::Index(f / dj)) * pj(Eigen::Index(f % dj)) / tr : 0.0;
        if (std::abs(b(r, c) - want) > tol) return false;
      }
  }
  return true;
}

void BlockDensity::replace_mode(Mode mode, const RealVector& pop) {
  const Mode other = mode == Mode::i ? Mode::j : Mode::i;
  const RealVector keep = marginal(other);
  *this = mode == Mode::i ? product(space, pop, keep) : product(space, keep, pop);
}

// ------------------------------------------------------------ SectorUnitary

void SectorUnitary::apply(BlockDensity& rho) const {
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    if (blocks[s].rows() <= 1) continue;  // empty, or a phase that cancels
    rho.blocks[s] = blocks[s] * rho.blocks[s] * blocks[s].adjoint();
  }
}

void SectorUnitary::apply(Vector& psi) const {
  const auto& secs = space->sectors();
  for (std::size_t s = 0; s < secs.size(); ++s) {
    if (blocks[s].size() == 0) continue;
    const auto idx = as_index(secs[s].states);
    const Vector part = psi(idx);
    psi(idx) = blocks[s] * part;
  }
}

Matrix SectorUnitary::apply_dense(const Matrix& rho) const {
  const auto& secs = space->sectors();
  Matrix left(rho.rows(), rho.cols());
  for (std::size_t s = 0; s < secs.size(); ++s) {
    const auto idx = as_index(secs[s].states);
    left(idx, Eigen::all) = blocks[s] * rho(idx, Eigen::all);
  }
  Matrix out(rho.rows(), rho.cols());
  for (std::size_t s = 0; s < secs.size(); ++s) {
    const auto idx = as_index(secs[s].states);
    out(Eigen::all, idx) = left(Eigen::all, idx) * blocks[s].adjoint();
  }
  return out;
}

// --------------------------------------------------------- SectorPropagator

SectorPropagator::SectorPropagator(const Hamiltonian& h, SpacePtr space,
                                   SectorStepOptions opt)
    : h_(h), space_(std::move(space)), opt_(opt) {
  const auto sign = h.conserved_sign();
  if (!sign || (*sign != space_->sign() && !h.empty())) {
    // Purely diagonal Hamiltonians conserve both charges.
    bool diagonal = true;
    for (const auto& t : h.terms())
      if (t.on_i.offset != 0 || t.on_j.offset != 0) diagonal = false;
    if (!diagonal) throw ValidationError("Hamiltonian does not conserve the sector charge");
  }
  if (h.dim_i().cutoff != space_->dim_i().cutoff ||
      h.dim_j().cutoff != space_->dim_j().cutoff) {
    throw DimensionError("Hamiltonian does not match sector space");
  }
  // Exactness is decided on the envelope support; callers ask for
  // sub-intervals of it.
  double t0 = 0.0, t1 = 0.0;
  for (const auto& t : h.terms())
    if (t.envelope) {
      t0 = std::min(t0, t.envelope->start);
      t1 = std::max(t1, t.envelope->start + t.envelope->duration);
    }
  profile_ = h.single_profile(t0, t1);
  exact_ = profile_.has_value();
  if (exact_) {
    eig_.resize(space_->sectors().size());
    eig_once_ = std::make_unique<std::once_flag[]>(space_->sectors().size());
  }
}

const SectorPropagator::Eig& SectorPropagator::eig(std::size_t s) const {
  std::call_once(eig_once_[s], [&] {
    eig_[s] = std::make_unique<Eig>(space_->block(h_, s, profile_->weights));
  });
  return *eig_[s];
}

SectorUnitary SectorPropagator::unitary(double t0, double t1,
                                        const std::vector<bool>* active) const {
  SectorUnitary u{space_, {}};
  const std::size_t ns = space_->sectors().size();
  u.blocks.resize(ns);
  if (t1 == t0) {
    for (std::size_t s = 0; s < ns; ++s)
      if (!active || (*active)[s]) {
        const auto n = static_cast<Eigen::Index>(space_->sectors()[s].states.size());
        u.blocks[s] = Matrix::Identity(n, n);
      }
    last_steps_ = 0;
    return u;
  }
  if (exact_) {
    double theta = t1 - t0;
    if (profile_->envelope) {
      theta = profile_->integral(t0, t1);
    } else {
      // Rectangular windows act as constants only inside their support.
      for (const auto& t : h_.terms()) {
        if (!t.envelope) continue;
        const double a = t.envelope->start, b = a + t.envelope->duration;
        const double slack = 1e-12 * t.envelope->duration;
        if (t0 < a - slack || t1 > b + slack) {
          throw ValidationError("interval leaves the rectangular drive window");
        }
      }
    }
#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < ns; ++s)
      if (!active || (*active)[s]) u.blocks[s] = unitary_from_eig(eig(s), theta);
    last_steps_ = 0;
    return u;
  }

  const double dur = t1 - t0;
  double steps = std::ceil(std::abs(dur) * h_.norm_bound() / opt_.max_phase);
  const double wmax = h_.max_frequency();
  if (wmax > 0.0)
    steps = std::max(steps, std::ceil(std::abs(dur) * wmax * opt_.steps_per_period /
                                      constants::two_pi));
  for (const auto& t : h_.terms())
    if (t.envelope && t.envelope->kind == EnvelopeKind::blackman)
      steps = std::max(steps, std::ceil(std::abs(dur) * opt_.steps_per_window /
                                        t.envelope->duration));
  const long n = std::max(1L, static_cast<long>(steps));
  const double dt = dur / double(n);
  last_steps_ = n;

  for (std::size_t s = 0; s < ns; ++s) {
    if (active && !(*active)[s]) continue;
    const auto sz = static_cast<Eigen::Index>(space_->sectors()[s].states.size());
    u.blocks[s] = Matrix::Identity(sz, sz);
  }
  const std::size_t nt = h_.terms().size();
  std::vector<cplx> first(nt), second(nt);
  for (long k = 0; k < n; ++k) {
    const double t = t0 + double(k) * dt;
    for (std::size_t m = 0; m < nt; ++m) {
      const cplx h1 = h_.terms()[m].coefficient(t + kNode1 * dt);
      const cplx h2 = h_.terms()[m].coefficient(t + kNode2 * dt);
      first[m] = dt * (kWeight2 * h1 + kWeight1 * h2);
      second[m] = dt * (kWeight1 * h1 + kWeight2 * h2);
    }
#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < ns; ++s) {
      if (u.blocks[s].size() == 0) continue;
      const Matrix e1 = expm_hermitian(space_->block(h_, s, first));
      const Matrix e2 = expm_hermitian(space_->block(h_, s, second));
      u.blocks[s] = e2 * (e1 * u.blocks[s]);
    }
  }
  return u;
}

std::vector<bool> active_sectors(const BlockDensity& rho, double tol) {
  std::vector<bool> on(rho.blocks.size());
  for (std::size_t s = 0; s < on.size(); ++s)
    on[s] = rho.blocks[s].cwiseAbs().maxCoeff() > tol;
  return on;
}

std::vector<bool> active_sectors(const SectorSpace& space, const Vector& psi,
                                 double tol) {
  const auto& secs = space.sectors();
  std::vector<bool> on(secs.size(), false);
  for (std::size_t s = 0; s < secs.size(); ++s)
    for (std::size_t f : secs[s].states)
      if (std::abs(psi(static_cast<Eigen::Index>(f))) > tol) {
        on[s] = true;
        break;
      }
  return on;
}

// ---------------------------------------------------------- BlockDissipator

RealVector heat_populations(const RealVector& p, double n_dot, double duration) {
  if (!(n_dot >= 0.0)) throw ValidationError("heating rate must be >= 0");
  if (n_dot == 0.0 || duration <= 0.0) return p;
  const Eigen::Index d = p.size();
  const auto deriv = [&](const RealVector& x) {
    RealVector out = RealVector::Zero(d);
    for (Eigen::Index n = 0; n < d; ++n) {
      const double up = n + 1 < d ? double(n + 1) : 0.0;  // a^dagger blocked at the top
      out(n) -= n_dot * (double(n) + up) * x(n);
      if (n > 0) out(n - 1) += n_dot * double(n) * x(n);
      if (n + 1 < d) out(n + 1) += n_dot * up * x(n);
    }
    return out;
  };
  const double stiff = n_dot * double(2 * d - 1);
  const long steps = std::max(1L, static_cast<long>(std::ceil(duration * stiff / 0.2)));
  const double dt = duration / double(steps);
  RealVector x = p;
  for (long k = 0; k < steps; ++k) {
    const RealVector k1 = deriv(x);
    const RealVector k2 = deriv(x + 0.5 * dt * k1);
    const RealVector k3 = deriv(x + 0.5 * dt * k2);
    const RealVector k4 = deriv(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

std::vector<LadderChannel> heating_pair(double n_dot_i, double n_dot_j) {
  std::vector<LadderChannel> out;
  if (n_dot_i > 0.0) {
    out.push_back({Mode::i, false, n_dot_i});
    out.push_back({Mode::i, true, n_dot_i});
  }
  if (n_dot_j > 0.0) {
    out.push_back({Mode::j, false, n_dot_j});
    out.push_back({Mode::j, true, n_dot_j});
  }
  return out;
}

BlockDissipator::BlockDissipator(SpacePtr space, std::vector<LadderChannel> channels,
                                 double step_bound)
    : space_(std::move(space)), channels_(std::move(channels)), step_bound_(step_bound) {
  if (!(step_bound > 0.0 && step_bound <= 1.39))
    throw ValidationError("dissipator step bound must lie in (0, 1.39]");
  const auto& secs = space_->sectors();
  const auto di = static_cast<long>(space_->dim_i().cutoff);
  const auto dj = static_cast<long>(space_->dim_j().cutoff);
  loss_.resize(secs.size());
  for (std::size_t s = 0; s < secs.size(); ++s)
    loss_[s] = RealVector::Zero(static_cast<Eigen::Index>(secs[s].states.size()));

  for (const auto& ch : channels_) {
    if (!(ch.rate >= 0.0)) throw ValidationError("channel rate must be >= 0");
    if (ch.rate == 0.0) continue;
    const int step = ch.raising ? 1 : -1;
    std::vector<Map> local(secs.size());
    for (std::size_t s = 0; s < secs.size(); ++s) {
      local[s].source = s;
      local[s].target = SectorSpace::npos;
      local[s].rate = ch.rate;
      for (std::size_t p = 0; p < secs[s].states.size(); ++p) {
        const auto f = static_cast<long>(secs[s].states[p]);
        long ni = f / dj, nj = f % dj;
        const long n = ch.mode == Mode::i ? ni : nj;
        const long d = ch.mode == Mode::i ? di : dj;
        const long m = n + step;
        // L^dag L diagonal in the truncated space
        const double amp = (m >= 0 && m < d)
                               ? std::sqrt(double(ch.raising ? n + 1 : n))
                               : 0.0;
        loss_[s](static_cast<Eigen::Index>(p)) += ch.rate * amp * amp;
        if (amp == 0.0) continue;
        (ch.mode == Mode::i ? ni : nj) = m;
        const auto target = static_cast<std::size_t>(ni * dj + nj);
        local[s].target = space_->sector_of(target);
        local[s].jumps.push_back({p, space_->position_of(target), amp});
      }
    }
    for (auto& m : local)
      if (!m.jumps.empty()) maps_.push_back(std::move(m));
  }
  for (const auto& l : loss_)
    if (l.size() > 0) stiffness_ = std::max(stiffness_, l.maxCoeff());
}

void BlockDissipator::derivative(const BlockDensity& rho, BlockDensity& out) const {
  const std::size_t ns = rho.blocks.size();
  out.space = rho.space;
  out.blocks.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& l = loss_[s];
    const auto n = rho.blocks[s].rows();
    out.blocks[s].resize(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < n; ++r)
        out.blocks[s](r, c) = -0.5 * (l(r) + l(c)) * rho.blocks[s](r, c);
  }
  for (const auto& m : maps_) {
    const Matrix& src = rho.blocks[m.source];
    Matrix& dst = out.blocks[m.target];
    for (const auto& jc : m.jumps)
      for (const auto& jr : m.jumps)
        dst(static_cast<Eigen::Index>(jr.to_pos), static_cast<Eigen::Index>(jc.to_pos)) +=
            m.rate * jr.amp * jc.amp *
            src(static_cast<Eigen::Index>(jr.from_pos), static_cast<Eigen::Index>(jc.from_pos));
  }
}

long BlockDissipator::evolve(BlockDensity& rho, double duration) const {
  if (channels_.empty() || duration <= 0.0 || stiffness_ == 0.0) return 0;
  const long n = std::max(1L, static_cast<long>(std::ceil(duration * stiffness_ / step_bound_)));
  const double dt = duration / double(n);
  BlockDensity k1, k2, k3, k4, tmp;
  auto axpy = [](const BlockDensity& base, double a, const BlockDensity& d,
                 BlockDensity& out) {
    out.space = base.space;
    out.blocks.resize(base.blocks.size());
    for (std::size_t s = 0; s < base.blocks.size(); ++s)
      out.blocks[s] = base.blocks[s] + a * d.blocks[s];
  };
  for (long k = 0; k < n; ++k) {
    derivative(rho, k1);
    axpy(rho, dt / 2.0, k1, tmp);
    derivative(tmp, k2);
    axpy(rho, dt / 2.0, k2, tmp);
    derivative(tmp, k3);
    axpy(rho, dt, k3, tmp);
    derivative(tmp, k4);
    for (std::size_t s = 0; s < rho.blocks.size(); ++s)
      rho.blocks[s] += (dt / 6.0) * (k1.blocks[s] + 2.0 * k2.blocks[s] +
                                     2.0 * k3.blocks[s] + k4.blocks[s]);
  }
  return n;
}

SplitReport evolve_split(BlockDensity& rho, const SectorPropagator& prop,
                         const BlockDissipator& diss, double t0, double t1,
                         double max_piece) {
  SplitReport rep;
  const double dur = t1 - t0;
  if (dur <= 0.0) return rep;
  long pieces = 1;
  if (max_piece > 0.0)
    pieces = std::max(pieces, static_cast<long>(std::ceil(dur / max_piece)));
  else if (!diss.empty())
    pieces = std::max(pieces, static_cast<long>(std::ceil(dur * diss.stiffness() / 0.25)));
  const double h = dur / double(pieces);
  rep.pieces = pieces;
  for (long k = 0; k < pieces; ++k) {
    const double a = t0 + double(k) * h;
    const double b = k + 1 == pieces ? t1 : t0 + double(k + 1) * h;
    rep.dissipator_steps += diss.evolve(rho, h / 2.0);
    const SectorUnitary u = prop.unitary(a, b);
    rep.magnus_steps += prop.last_step_count();
    u.apply(rho);
    rep.dissipator_steps += diss.evolve(rho, h / 2.0);
  }
  return rep;
}

}  // namespace modecouple
