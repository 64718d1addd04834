#include "modecouple/fock.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "modecouple/errors.hpp"

namespace modecouple {

namespace {

std::atomic<std::size_t> g_memory_budget{std::size_t{2} << 30};

constexpr double kNormTol = 1e-9;
constexpr double kHermTol = 1e-10;

void check_bytes(std::size_t elements, const char* what) {
  const std::size_t bytes = elements * sizeof(cplx);
  if (elements != 0 && bytes / sizeof(cplx) != elements) {
    throw DimensionError(std::string(what) + ": size overflow");
  }
  if (bytes > memory_budget()) {
    std::ostringstream os;
    os << what << ": " << bytes << " bytes exceeds memory budget of "
       << memory_budget();
    throw DimensionError(os.str());
  }
}

void check_two_mode_dims(std::size_t total, ModeDim di, ModeDim dj) {
  if (total != di.cutoff * dj.cutoff) {
    throw DimensionError("state length does not match d_i*d_j");
  }
}

}  // namespace

std::size_t memory_budget() { return g_memory_budget.load(); }
void set_memory_budget(std::size_t bytes) { g_memory_budget.store(bytes); }

ModeDim::ModeDim(std::size_t levels) : cutoff(levels) {
  if (levels < 2) throw ValidationError("mode cutoff must be >= 2");
}

ModeOperator ModeOperator::annihilate(ModeDim d) {
  const auto n = static_cast<Eigen::Index>(d.cutoff);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) m(k - 1, k) = std::sqrt(double(k));
  return {std::move(m), OperatorLabel::annihilate};
}

ModeOperator ModeOperator::create(ModeDim d) {
  auto a = annihilate(d);
  return {a.matrix.adjoint(), OperatorLabel::create};
}

ModeOperator ModeOperator::number(ModeDim d) {
  const auto n = static_cast<Eigen::Index>(d.cutoff);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m(k, k) = double(k);
  return {std::move(m), OperatorLabel::number};
}

ModeOperator ModeOperator::identity(ModeDim d) {
  const auto n = static_cast<Eigen::Index>(d.cutoff);
  return {Matrix::Identity(n, n), OperatorLabel::identity};
}

// ---------------------------------------------------------------- ModeState

ModeState ModeState::pure(Vector amplitudes) {
  if (amplitudes.size() < 2) throw DimensionError("mode state needs >= 2 levels");
  if (std::abs(amplitudes.squaredNorm() - 1.0) > kNormTol) {
    throw ValidationError("pure mode state is not normalised");
  }
  return ModeState(std::move(amplitudes));
}

ModeState ModeState::mixed(Matrix rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 2) {
    throw DimensionError("density matrix must be square with >= 2 levels");
  }
  if (std::abs(rho.trace().real() - 1.0) > kNormTol) {
    throw ValidationError("mode density matrix trace is not 1");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw ValidationError("mode density matrix is not Hermitian");
  }
  return ModeState(std::move(rho));
}

std::size_t ModeState::dim() const {
  return is_pure() ? static_cast<std::size_t>(vector().size())
                   : static_cast<std::size_t>(matrix().rows());
}

Matrix ModeState::density() const {
  if (is_pure()) return vector() * vector().adjoint();
  return matrix();
}

RealVector ModeState::populations() const {
  if (is_pure()) return vector().cwiseAbs2();
  return matrix().diagonal().real();
}

// ------------------------------------------------------------- TwoModeState

TwoModeState TwoModeState::pure(Vector amplitudes, ModeDim di, ModeDim dj) {
  check_two_mode_dims(static_cast<std::size_t>(amplitudes.size()), di, dj);
  if (std::abs(amplitudes.squaredNorm() - 1.0) > kNormTol) {
    throw ValidationError("pure two-mode state is not normalised");
  }
  return TwoModeState(std::move(amplitudes), di, dj);
}

TwoModeState TwoModeState::mixed(Matrix rho, ModeDim di, ModeDim dj) {
  if (rho.rows() != rho.cols()) throw DimensionError("density matrix not square");
  check_two_mode_dims(static_cast<std::size_t>(rho.rows()), di, dj);
  if (std::abs(rho.trace().real() - 1.0) > kNormTol) {
    throw ValidationError("two-mode density matrix trace is not 1");
  }
  double herm = 0.0;
  for (Eigen::Index c = 0; c < rho.cols(); ++c)
    for (Eigen::Index r = 0; r <= c; ++r)
      herm = std::max(herm, std::abs(rho(r, c) - std::conj(rho(c, r))));
  if (herm > kHermTol) {
    throw ValidationError("two-mode density matrix is not Hermitian");
  }
  return TwoModeState(std::move(rho), di, dj);
}

TwoModeState TwoModeState::to_mixed() const {
  if (!is_pure()) return *this;
  check_bytes(size() * size(), "to_mixed");
  return TwoModeState(Matrix(vector() * vector().adjoint()), di_, dj_);
}

RealVector TwoModeState::populations() const {
  if (is_pure()) return vector().cwiseAbs2();
  return matrix().diagonal().real();
}

double TwoModeState::norm() const {
  if (is_pure()) return vector().squaredNorm();
  return matrix().trace().real();
}

double TwoModeState::min_eigenvalue() const {
  if (is_pure()) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ----------------------------------------------------------------- builders

ModeState fock_state(std::size_t n, ModeDim dim) {
  if (n >= dim.cutoff) throw TruncationError("Fock level beyond cutoff");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim.cutoff));
  v(static_cast<Eigen::Index>(n)) = 1.0;
  return ModeState::pure(std::move(v));
}

ModeState vacuum(ModeDim dim) { return fock_state(0, dim); }

RealVector thermal_populations(double n_bar, ModeDim dim) {
  if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) {
    throw ValidationError("thermal occupation must be finite and >= 0");
  }
  const auto n = static_cast<Eigen::Index>(dim.cutoff);
  RealVector p = RealVector::Zero(n);
  if (n_bar == 0.0) {
    p(0) = 1.0;
    return p;
  }
  const double ratio = n_bar / (n_bar + 1.0);
  double w = 1.0 / (n_bar + 1.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    p(k) = w;
    w *= ratio;
  }
  p /= p.sum();
  double mean = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) mean += double(k) * p(k);
  if (std::abs(mean - n_bar) > 0.01 * n_bar) {
    std::ostringstream os;
    os << "cutoff " << dim.cutoff << " too small for thermal n_bar=" << n_bar
       << " (truncated mean " << mean << ")";
    throw TruncationError(os.str());
  }
  return p;
}

ModeState make_thermal(double n_bar, ModeDim dim) {
  const RealVector p = thermal_populations(n_bar, dim);
  return ModeState::mixed(p.cast<cplx>().asDiagonal().toDenseMatrix());
}

std::size_t thermal_cutoff(double n_bar) {
  for (std::size_t d = 2;; ++d) {
    if (n_bar == 0.0) return d;
    const double ratio = n_bar / (n_bar + 1.0);
    // truncated geometric mean, closed form
    const double rd = std::pow(ratio, double(d));
    const double mean =
        ratio / (1.0 - ratio) - double(d) * rd / (1.0 - rd);
    if (std::abs(mean - n_bar) <= 0.01 * n_bar) return d;
  }
}

TwoModeState tensor(const ModeState& a, const ModeState& b) {
  const ModeDim di(a.dim()), dj(b.dim());
  const std::size_t total = di.cutoff * dj.cutoff;
  if (a.is_pure() && b.is_pure()) {
    check_bytes(total, "tensor");
    Vector v(static_cast<Eigen::Index>(total));
    for (std::size_t ni = 0; ni < di.cutoff; ++ni)
      v.segment(static_cast<Eigen::Index>(ni * dj.cutoff),
                static_cast<Eigen::Index>(dj.cutoff)) =
          a.vector()(static_cast<Eigen::Index>(ni)) * b.vector();
    return TwoModeState::pure(std::move(v), di, dj);
  }
  check_bytes(total * total, "tensor");
  return TwoModeState::mixed(kron(a.density(), b.density()), di, dj);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

// -------------------------------------------------------------- expectation

cplx expect_product(const TwoModeState& s, const Matrix& on_i,
                    const Matrix& on_j) {
  const auto di = static_cast<Eigen::Index>(s.dim_i().cutoff);
  const auto dj = static_cast<Eigen::Index>(s.dim_j().cutoff);
  if (on_i.rows() != di || on_i.cols() != di || on_j.rows() != dj ||
      on_j.cols() != dj) {
    throw DimensionError("operator dimension does not match state");
  }
  if (s.is_pure()) {
    // psi as a d_i x d_j matrix (row-major flat index)
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        psi(s.vector().data(), di, dj);
    const Matrix transformed = on_i * psi * on_j.transpose();
    return (psi.conjugate().cwiseProduct(transformed)).sum();
  }
  // Tr(rho (A (x) B)) = sum rho[(a,b),(c,d)] A[c,a] B[d,b]
  const Matrix& rho = s.matrix();
  cplx acc = 0.0;
  for (Eigen::Index a = 0; a < di; ++a)
    for (Eigen::Index c = 0; c < di; ++c) {
      const cplx ac = on_i(c, a);
      if (ac == cplx(0.0)) continue;
      const auto blk = rho.block(a * dj, c * dj, dj, dj);
      acc += ac * (blk.transpose().cwiseProduct(on_j)).sum();
    }
  return acc;
}

cplx expect_complex(const TwoModeState& s, const ModeOperator& op, Mode mode) {
  const auto di = static_cast<Eigen::Index>(s.dim_i().cutoff);
  const auto dj = static_cast<Eigen::Index>(s.dim_j().cutoff);
  if (mode == Mode::i) return expect_product(s, op.matrix, Matrix::Identity(dj, dj));
  return expect_product(s, Matrix::Identity(di, di), op.matrix);
}

double expect(const TwoModeState& s, const ModeOperator& op, Mode mode) {
  return expect_complex(s, op, mode).real();
}

cplx expect_complex(const TwoModeState& s, const Matrix& joint) {
  const auto n = static_cast<Eigen::Index>(s.size());
  if (joint.rows() != n || joint.cols() != n) {
    throw DimensionError("joint operator dimension does not match state");
  }
  if (s.is_pure()) return s.vector().dot(joint * s.vector());
  return (s.matrix().transpose().cwiseProduct(joint)).sum();
}

double expect(const TwoModeState& s, const Matrix& joint) {
  return expect_complex(s, joint).real();
}

double mean_occupation(const TwoModeState& s, Mode mode) {
  const RealVector p = s.populations();
  const std::size_t dj = s.dim_j().cutoff;
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::size_t n = mode == Mode::i ? k / dj : k % dj;
    acc += double(n) * p(static_cast<Eigen::Index>(k));
  }
  return acc;
}

Matrix partial_trace(const TwoModeState& s, Mode keep) {
  const auto di = static_cast<Eigen::Index>(s.dim_i().cutoff);
  const auto dj = static_cast<Eigen::Index>(s.dim_j().cutoff);
  if (s.is_pure()) {
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        psi(s.vector().data(), di, dj);
    if (keep == Mode::i) return psi * psi.adjoint();
    return (psi.transpose() * psi.conjugate());
  }
  const Matrix& rho = s.matrix();
  if (keep == Mode::i) {
    Matrix out(di, di);
    for (Eigen::Index a = 0; a < di; ++a)
      for (Eigen::Index c = 0; c < di; ++c)
        out(a, c) = rho.block(a * dj, c * dj, dj, dj).trace();
    return out;
  }
  Matrix out = Matrix::Zero(dj, dj);
  for (Eigen::Index a = 0; a < di; ++a) out += rho.block(a * dj, a * dj, dj, dj);
  return out;
}

}  // namespace modecouple
