#pragma once

// Block structure of Hamiltonians that conserve a charge n_i + s n_j.
// Exchange (s = +1) and pair creation (s = -1) drives never mix charge
// sectors, so states and propagators split into small dense blocks.

#include <array>
#include <memory>
#include <mutex>
#include <vector>

#include "modecouple/fock.hpp"
#include "modecouple/hamiltonian.hpp"

namespace modecouple {

class SectorSpace {
 public:
  struct Sector {
    int charge = 0;
    std::vector<std::size_t> states;  // flat indices, increasing n_i
  };

  SectorSpace(ModeDim di, ModeDim dj, int sign);

  ModeDim dim_i() const { return di_; }
  ModeDim dim_j() const { return dj_; }
  int sign() const { return sign_; }
  std::size_t size() const { return di_.cutoff * dj_.cutoff; }
  const std::vector<Sector>& sectors() const { return sectors_; }
  std::size_t sector_of(std::size_t flat) const { return sector_of_[flat]; }
  std::size_t position_of(std::size_t flat) const { return position_of_[flat]; }
  /// Sector index for a charge, or npos.
  std::size_t find(int charge) const;
  std::size_t largest_sector() const;

  /// Dense block of sum_k coefs[k] * term_k restricted to sector s.
  Matrix block(const Hamiltonian& h, std::size_t s,
               const std::vector<cplx>& coefs) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  ModeDim di_, dj_;
  int sign_;
  int min_charge_ = 0;
  std::vector<Sector> sectors_;
  std::vector<std::size_t> by_charge_;
  std::vector<std::size_t> sector_of_;
  std::vector<std::size_t> position_of_;
};

using SpacePtr = std::shared_ptr<const SectorSpace>;

/// Density matrix that is block diagonal in the charge sectors.
struct BlockDensity {
  SpacePtr space;
  std::vector<Matrix> blocks;

  /// Throws ValidationError if rho has weight outside the diagonal blocks.
  static BlockDensity from_state(SpacePtr space, const TwoModeState& state);
  /// Product of two diagonal single-mode population vectors.
  static BlockDensity product(SpacePtr space, const RealVector& p_i,
                              const RealVector& p_j);

  TwoModeState to_state() const;
  double trace() const;
  RealVector populations() const;
  /// Marginal occupation distribution of one mode.
  RealVector marginal(Mode mode) const;
  double mean_occupation(Mode mode) const;
  /// Largest |rho - rho^dagger| entry.
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  /// Replace one mode by a diagonal state (trace out and re-tensor).
  void replace_mode(Mode mode, const RealVector& populations);
  /// True when rho equals the product of its diagonal marginals.
  bool is_product_diagonal(double tol = 1e-14) const;
};

/// Per-sector unitaries for one time interval.
struct SectorUnitary {
  SpacePtr space;
  std::vector<Matrix> blocks;

  void apply(BlockDensity& rho) const;
  void apply(Vector& psi) const;
  /// U rho U^dagger for an arbitrary dense rho in the flat basis.
  Matrix apply_dense(const Matrix& rho) const;
};

struct SectorStepOptions {
  /// Bound on ||H_S|| dt for Magnus steps with exact block exponentials.
  double max_phase = 2.0;
  /// Steps per pulse window for shaped envelopes.
  int steps_per_window = 128;
  /// Steps per period of the fastest tone.
  int steps_per_period = 40;
};

/// Builds sector unitaries for a charge-conserving Hamiltonian. When all
/// terms share one real profile the propagator is exact; otherwise a
/// fourth-order commutator-free Magnus scheme with exact block exponentials
/// is used.
class SectorPropagator {
 public:
  SectorPropagator(const Hamiltonian& h, SpacePtr space,
                   SectorStepOptions opt = {});

  SpacePtr space() const { return space_; }
  bool exact() const { return exact_; }
  /// Sector unitaries over [t0, t1]. Sectors not flagged in `active`
  /// are left empty and skipped by SectorUnitary::apply.
  SectorUnitary unitary(double t0, double t1,
                        const std::vector<bool>* active = nullptr) const;
  /// Magnus steps used by the last non-exact call (0 when exact).
  long last_step_count() const { return last_steps_; }

 private:
  Hamiltonian h_;
  SpacePtr space_;
  SectorStepOptions opt_;
  bool exact_ = false;
  std::optional<SingleProfile> profile_;
  // Block eigensystems of the generator, built on first use.
  using Eig = Eigen::SelfAdjointEigenSolver<Matrix>;
  mutable std::vector<std::unique_ptr<Eig>> eig_;
  mutable std::unique_ptr<std::once_flag[]> eig_once_;
  mutable long last_steps_ = 0;

  const Eig& eig(std::size_t s) const;
};

/// Sectors carrying any weight.
std::vector<bool> active_sectors(const BlockDensity& rho, double tol = 0.0);
std::vector<bool> active_sectors(const SectorSpace& space, const Vector& psi,
                                 double tol = 0.0);

/// One-mode heating or damping channel, L = a or a^dagger on `mode`.
struct LadderChannel {
  Mode mode = Mode::i;
  bool raising = false;  // true: a^dagger, false: a
  double rate = 0.0;     // 1/s
};

/// Heating pair (a and a^dagger at rate n_dot) on each mode.
std::vector<LadderChannel> heating_pair(double n_dot_i, double n_dot_j);

/// Populations of one mode after heating at n_dot for `duration`, with the
/// same truncation as BlockDissipator (no raising out of the top level).
RealVector heat_populations(const RealVector& p, double n_dot, double duration);

/// Lindblad dissipator acting on block-diagonal states.
class BlockDissipator {
 public:
  /// RK4 steps satisfy stiffness * dt <= step_bound (stable below 1.39).
  BlockDissipator(SpacePtr space, std::vector<LadderChannel> channels,
                  double step_bound = 0.2);

  bool empty() const { return channels_.empty(); }
  /// d rho / dt
  void derivative(const BlockDensity& rho, BlockDensity& out) const;
  /// Fixed-step RK4 over duration; returns steps taken.
  long evolve(BlockDensity& rho, double duration) const;
  /// Largest decay rate, sets the RK4 step.
  double stiffness() const { return stiffness_; }

 private:
  struct Jump {
    std::size_t from_pos, to_pos;
    double amp;
  };
  struct Map {
    std::size_t source, target;  // sectors
    double rate;
    std::vector<Jump> jumps;
  };
  SpacePtr space_;
  std::vector<LadderChannel> channels_;
  std::vector<Map> maps_;
  std::vector<RealVector> loss_;  // sum_k rate_k <L_k^dag L_k> per sector
  double stiffness_ = 0.0;
  double step_bound_ = 0.2;
};

struct SplitReport {
  long pieces = 0;
  long dissipator_steps = 0;
  long magnus_steps = 0;
};

/// Evolve a block state under H(t) plus dissipator with symmetric
/// (Strang) splitting over [t0, t1]. Pieces are at most max_piece long
/// when it is positive; otherwise stiffness * piece <= 0.25.
SplitReport evolve_split(BlockDensity& rho, const SectorPropagator& prop,
                         const BlockDissipator& diss, double t0, double t1,
                         double max_piece = 0.0);

}  // namespace modecouple
