#pragma once

#include <complex>
#include <cstddef>
#include <variant>

#include <Eigen/Dense>

namespace modecouple {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Bytes a single state object may occupy. Defaults to 2 GiB.
std::size_t memory_budget();
void set_memory_budget(std::size_t bytes);

/// Number of Fock levels kept for one mode.
struct ModeDim {
  std::size_t cutoff = 2;

  ModeDim() = default;
  explicit ModeDim(std::size_t levels);
};

enum class Mode { i = 0, j = 1 };

enum class OperatorLabel { annihilate, create, number, identity, custom };

struct ModeOperator {
  Matrix matrix;
  OperatorLabel label = OperatorLabel::custom;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }

  static ModeOperator annihilate(ModeDim d);
  static ModeOperator create(ModeDim d);
  static ModeOperator number(ModeDim d);
  static ModeOperator identity(ModeDim d);
};

/// Single-mode state: amplitude vector or density matrix.
class ModeState {
 public:
  static ModeState pure(Vector amplitudes);
  static ModeState mixed(Matrix rho);

  bool is_pure() const { return std::holds_alternative<Vector>(data_); }
  std::size_t dim() const;
  const Vector& vector() const { return std::get<Vector>(data_); }
  const Matrix& matrix() const { return std::get<Matrix>(data_); }
  Matrix density() const;
  /// Occupation probabilities p_n.
  RealVector populations() const;

 private:
  explicit ModeState(std::variant<Vector, Matrix> d) : data_(std::move(d)) {}
  std::variant<Vector, Matrix> data_;
};

/// Two-mode state over |n_i> (x) |n_j>, flat index n_i * d_j + n_j.
class TwoModeState {
 public:
  static TwoModeState pure(Vector amplitudes, ModeDim di, ModeDim dj);
  static TwoModeState mixed(Matrix rho, ModeDim di, ModeDim dj);

  bool is_pure() const { return std::holds_alternative<Vector>(data_); }
  ModeDim dim_i() const { return di_; }
  ModeDim dim_j() const { return dj_; }
  std::size_t size() const { return di_.cutoff * dj_.cutoff; }
  std::size_t index(std::size_t ni, std::size_t nj) const {
    return ni * dj_.cutoff + nj;
  }

  const Vector& vector() const { return std::get<Vector>(data_); }
  const Matrix& matrix() const { return std::get<Matrix>(data_); }

  /// Density-matrix form (copies for pure states).
  TwoModeState to_mixed() const;
  /// Diagonal of the density matrix.
  RealVector populations() const;

  /// Norm of a pure state or trace of a mixed one.
  double norm() const;
  /// Smallest eigenvalue of the density matrix (0 for pure states).
  double min_eigenvalue() const;

 private:
  TwoModeState(std::variant<Vector, Matrix> d, ModeDim di, ModeDim dj)
      : data_(std::move(d)), di_(di), dj_(dj) {}
  std::variant<Vector, Matrix> data_;
  ModeDim di_, dj_;
};

ModeState fock_state(std::size_t n, ModeDim dim);
ModeState vacuum(ModeDim dim);

/// Thermal occupation probabilities renormalised over the kept levels.
/// Throws TruncationError when the truncated mean misses n_bar by more
/// than 1%.
RealVector thermal_populations(double n_bar, ModeDim dim);
ModeState make_thermal(double n_bar, ModeDim dim);

/// Smallest cutoff that keeps a thermal state within the truncation check.
std::size_t thermal_cutoff(double n_bar);

TwoModeState tensor(const ModeState& a, const ModeState& b);

/// Expectation of an operator acting on one mode.
double expect(const TwoModeState& s, const ModeOperator& op, Mode mode);
cplx expect_complex(const TwoModeState& s, const ModeOperator& op, Mode mode);
/// Expectation of a full joint operator (dimension d_i*d_j).
double expect(const TwoModeState& s, const Matrix& joint);
cplx expect_complex(const TwoModeState& s, const Matrix& joint);
/// <A_i (x) B_j> without forming the Kronecker product.
cplx expect_product(const TwoModeState& s, const Matrix& on_i,
                    const Matrix& on_j);
double mean_occupation(const TwoModeState& s, Mode mode);

Matrix partial_trace(const TwoModeState& s, Mode keep);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace modecouple
