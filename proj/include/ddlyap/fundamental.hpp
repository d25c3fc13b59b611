#pragma once

#include "ddlyap/system.hpp"

#include <vector>

namespace ddlyap {

struct LatticeOptions {
  std::size_t max_points = 1'000'000;
};

/// All sums sum_j p_j h_j <= horizon, ascending. Rational delays are
/// enumerated exactly on integer ticks; float delays merge within
/// DelaySystem::merge_tolerance(). Throws HorizonTooLarge past max_points.
std::vector<double> discontinuity_instants(const DelaySystem& sys, double horizon, const LatticeOptions& opts = {});

/// Right-continuous piecewise-constant matrix function; pre_value on t < 0.
class StepMatrixFunction {
 public:
  StepMatrixFunction(Matrix pre_value, std::vector<double> breakpoints, std::vector<Matrix> values, double horizon,
                     double tol);

  const Matrix& pre_value() const noexcept { return pre_; }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  const std::vector<Matrix>& values() const noexcept { return values_; }
  double horizon() const noexcept { return horizon_; }
  double tolerance() const noexcept { return tol_; }

  /// Value at t (right-continuous). Breakpoints within tolerance count as reached.
  const Matrix& operator()(double t) const;
  /// Left limit at t.
  const Matrix& left_limit(double t) const;

 private:
  Matrix pre_;
  std::vector<double> breaks_;
  std::vector<Matrix> values_;
  double horizon_;
  double tol_;
};

/// Ordered (instant, jump) pairs; absent instants carry a zero jump.
class JumpTable {
 public:
  JumpTable(Index n, std::vector<double> instants, std::vector<Matrix> jumps, double horizon, double tol);

  const std::vector<double>& instants() const noexcept { return instants_; }
  const std::vector<Matrix>& jumps() const noexcept { return jumps_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return instants_.size(); }

  /// Pointer to the stored jump at t (within tolerance), or nullptr.
  const Matrix* find(double t) const;
  Matrix at(double t) const;

 private:
  Index n_;
  std::vector<double> instants_;
  std::vector<Matrix> jumps_;
  double horizon_;
  double tol_;
};

enum class Side { Right, Left };

/// K(t) on [-H, horizon]: Right uses K(t) = sum K(t - h_j) A_j, Left uses
/// K(t) = sum A_j K(t - h_j); both start from K0.
StepMatrixFunction fundamental_matrix(const ValidatedSystem& sys, double horizon, Side side = Side::Right,
                                      const LatticeOptions& opts = {});

struct JumpOptions {
  double drop_tolerance = 1e-14;
  LatticeOptions lattice{};
};

/// Delta K(0) = I, Delta K(t) = sum_j Delta K(t - h_j) A_j on the lattice.
JumpTable delta_k(const ValidatedSystem& sys, double horizon, const JumpOptions& opts = {});

struct SimulationOptions {
  std::size_t max_depth = 100'000;
};

using Trajectory = std::vector<Vector>;

/// Direct recursive descent x(t) = sum A_j x(t - h_j), memoized on time offsets.
Trajectory simulate(const ValidatedSystem& sys, const InitialFunction& phi, const std::vector<double>& grid,
                    const SimulationOptions& opts = {});

/// Cauchy formula with dK/dt read as the impulse train of Delta K:
/// x(t) = sum_j sum_k Delta K(t_k) A_j phi(t - h_j - t_k), argument in [-h_j, 0).
Trajectory simulate_cauchy(const ValidatedSystem& sys, const InitialFunction& phi, const std::vector<double>& grid,
                           const SimulationOptions& opts = {});

}  // namespace ddlyap
