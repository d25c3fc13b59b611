#pragma once

#include "ddlyap/fundamental.hpp"
#include "ddlyap/lyapunov.hpp"
#include "ddlyap/system.hpp"

#include <optional>
#include <vector>

namespace ddlyap {

struct OracleValue {
  Matrix value;
  double tail_bound;
  double horizon;
};

/// Ground truth for U and P from the step function K alone: the defining
/// integrals over [0, T] are finite sums over the merged breakpoint partition,
/// so only the tail beyond T is neglected.
class IntegralOracle {
 public:
  /// Default T: exp(-sigma T) <= 1e-12, capped so the lattice stays within
  /// 1e5 breakpoints. Throws NotStable for systems without a decay estimate.
  IntegralOracle(const ValidatedSystem& sys, const WeightMatrix& w, std::optional<double> horizon = std::nullopt);

  double horizon() const noexcept { return horizon_; }
  const StabilityReport& stability() const noexcept { return report_; }

  /// int_0^T (K(t) - K0)^T W K(t + tau) dt, tau in [-H, H].
  OracleValue u(double tau) const;
  /// int_0^T K^T W K0 - K0^T W K dt.
  OracleValue p() const;

  /// Bound on the neglected tail of the U integral beyond T.
  double u_tail_bound(double tau) const;

 private:
  ValidatedSystem sys_;
  Matrix w_;
  StabilityReport report_;
  DecayEstimate decay_;
  double horizon_;
  StepMatrixFunction k_;
};

OracleValue u_integral_oracle(const ValidatedSystem& sys, const WeightMatrix& w, double tau,
                              std::optional<double> horizon = std::nullopt);
OracleValue p_integral_oracle(const ValidatedSystem& sys, const WeightMatrix& w,
                              std::optional<double> horizon = std::nullopt);

struct CrossCheckReport {
  double max_error = 0.0;
  double tail_bound = 0.0;
  double horizon = 0.0;
  double tolerance = 1e-8;
  std::vector<double> taus;
  std::vector<double> errors;

  bool passed() const noexcept { return max_error <= tail_bound + tolerance; }
};

/// max over grid of ||U(tau) - oracle(tau)|| against tail bound + tolerance.
CrossCheckReport cross_check(const PiecewiseAffineMatrixFunction& u, const ValidatedSystem& sys,
                             const WeightMatrix& w, const std::vector<double>& grid,
                             std::optional<double> horizon = std::nullopt, double tolerance = 1e-8);

}  // namespace ddlyap
