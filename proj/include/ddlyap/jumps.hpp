#pragma once

#include "ddlyap/fundamental.hpp"
#include "ddlyap/lyapunov.hpp"
#include "ddlyap/system.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace ddlyap {

struct JumpSpectrum {
  std::vector<std::pair<double, Matrix>> entries;  // ascending tau
  double horizon = 0.0;                            // 0 for the exact segment route
  double bound = 0.0;

  /// Stored jump at tau (within tol) or a zero matrix.
  Matrix at(double tau, Index n, double tol = 1e-9) const;
};

struct SeriesValue {
  Matrix value;
  double bound;  // truncation tail plus accumulated rounding
};

/// Truncated lattice series for U' and Delta U' of a stable system. Built once
/// (Delta K and K tables over horizon + H) and queried per tau.
class JumpSeries {
 public:
  /// horizon defaults to the smallest T with exp(-sigma T) <= 1e-12 from the
  /// stability report's decay estimate. Throws NotStable when the report is
  /// not "stable" or carries no decay estimate.
  JumpSeries(const ValidatedSystem& sys, const WeightMatrix& w, std::optional<double> horizon = std::nullopt);

  double horizon() const noexcept { return horizon_; }
  const StabilityReport& stability() const noexcept { return report_; }
  const JumpTable& delta_k_table() const noexcept { return jumps_; }
  const ValidatedSystem& system() const noexcept { return sys_; }
  const Matrix& weight() const noexcept { return w_; }

  /// -sum_{t_q <= T} Delta K^T(t_q) W Delta K(t_q + tau); exactly zero off the lattice.
  SeriesValue delta_u_prime(double tau) const;
  /// sum_{t_k <= T} (K^T(t_k - tau) - K0^T) W Delta K(t_k). Right side gives
  /// U'(tau + 0), Left gives U'(tau - 0).
  SeriesValue u_prime(double tau, Side side = Side::Right) const;

 private:
  double tail_delta(double tau) const;
  double tail_prime() const;

  ValidatedSystem sys_;
  Matrix w_;
  StabilityReport report_;
  DecayEstimate decay_;
  double horizon_;
  JumpTable jumps_;
  StepMatrixFunction k_;
};

SeriesValue delta_u_prime(const ValidatedSystem& sys, const WeightMatrix& w, double tau,
                          std::optional<double> horizon = std::nullopt);
SeriesValue u_prime_series(const ValidatedSystem& sys, const WeightMatrix& w, double tau,
                           std::optional<double> horizon = std::nullopt);

/// Delta U'(k h) = D_k - D_{k-1} at the interior knots; jumps with
/// max-abs <= drop_tol * (1 + max |D|) are omitted.
JumpSpectrum jumps_from_segments(const PiecewiseAffineMatrixFunction& u, double drop_tol = 1e-12);

/// Series values of Delta U' on a tau grid, as a spectrum.
JumpSpectrum series_spectrum(const JumpSeries& series, const std::vector<double>& taus);

struct JumpPropertyReport {
  double symmetry = 0.0;   // ||dU(-tau) - dU(tau)^T||
  double dynamic = 0.0;    // both tau > 0 and tau < 0 branches
  double algebraic = 0.0;  // tau >= 0
  double bound = 0.0;      // largest per-value bound seen
  double psd_margin = 0.0; // min eigenvalue of -(dU(0) + W)
  std::size_t points = 0;

  bool passed(double factor = 10.0) const noexcept {
    return symmetry <= factor * bound && dynamic <= factor * bound && algebraic <= factor * bound;
  }
};

JumpPropertyReport check_jump_properties(const JumpSeries& series, const std::vector<double>& tau_grid);
JumpPropertyReport check_jump_properties(const ValidatedSystem& sys, const WeightMatrix& w,
                                         std::optional<double> horizon, const std::vector<double>& tau_grid);

/// Lattice differences in [-H, H] for a commensurate/single-delay system:
/// k h for k = -m..m where h is the basic delay.
std::vector<double> knot_grid(const ValidatedSystem& sys);

}  // namespace ddlyap
