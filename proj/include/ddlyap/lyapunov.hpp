#pragma once

#include "ddlyap/system.hpp"

#include <vector>

namespace ddlyap {

/// U on [-H, H] as affine segments: U(k h + xi) = C_k + xi D_k for xi in [0, h],
/// k = -m .. m-1. Knots are resolved right-continuously; tau = H uses the end
/// of the last segment.
class PiecewiseAffineMatrixFunction {
 public:
  PiecewiseAffineMatrixFunction(double basic_delay, int m, std::vector<Matrix> offsets, std::vector<Matrix> slopes);

  double basic_delay() const noexcept { return h_; }
  int m() const noexcept { return m_; }
  double max_delay() const noexcept { return h_ * m_; }
  Index dim() const noexcept { return offsets_.front().rows(); }

  /// Segment k in [-m, m-1].
  const Matrix& offset(int k) const { return offsets_.at(static_cast<std::size_t>(k + m_)); }
  const Matrix& slope(int k) const { return slopes_.at(static_cast<std::size_t>(k + m_)); }
  Matrix& offset(int k) { return offsets_.at(static_cast<std::size_t>(k + m_)); }
  Matrix& slope(int k) { return slopes_.at(static_cast<std::size_t>(k + m_)); }

  Matrix operator()(double tau) const;

  friend PiecewiseAffineMatrixFunction operator+(const PiecewiseAffineMatrixFunction& a,
                                                 const PiecewiseAffineMatrixFunction& b);

  // Solver metadata attached by the builders.
  double condition_estimate = 1.0;
  bool condition_warning = false;
  bool sparse_solve = false;
  std::size_t unknowns = 0;

 private:
  double h_;
  int m_;
  std::vector<Matrix> offsets_;
  std::vector<Matrix> slopes_;
};

/// Throws OutOfDomain outside [-H, H] (a relative slack of 1e-12 H is allowed).
Matrix evaluate(const PiecewiseAffineMatrixFunction& u, double tau);

/// P = K0^T [sum_j h_j (W K0 A_j - A_j^T K0^T W)] K0.
Matrix p_matrix(const ValidatedSystem& sys, const WeightMatrix& w);

struct BuildOptions {
  std::size_t dense_limit = 2000;   // unknowns; sparse LU above this
  bool sparse_enabled = true;
  std::size_t max_unknowns = 2'000'000;
  double warn_condition = 1e10;
  double fail_condition = 1e12;
};

/// Single delay: the 2n^2 Kronecker system solved against its constant and
/// xi-linear right-hand parts. Throws CriticalSystem when singular or when the
/// condition estimate exceeds fail_condition.
PiecewiseAffineMatrixFunction build_single_delay(const ValidatedSystem& sys, const WeightMatrix& w,
                                                 const BuildOptions& opts = {});

/// Commensurate delays: 2m blocks of n^2 unknowns Y_k, k = -m..m-1.
PiecewiseAffineMatrixFunction build_commensurate(const CommensurateForm& cf, const WeightMatrix& w,
                                                 const BuildOptions& opts = {});

/// Single delay of any kind, or all-rational delays; otherwise NonRationalInput.
PiecewiseAffineMatrixFunction build_lyapunov(const ValidatedSystem& sys, const WeightMatrix& w,
                                             const BuildOptions& opts = {});

struct ResidualReport {
  double symmetry = 0.0;
  double dynamic = 0.0;
  double continuity = 0.0;
  double condition_estimate = 1.0;
  std::size_t grid_points = 0;
  std::size_t points_per_segment = 0;

  double worst() const noexcept { return std::max({symmetry, dynamic, continuity}); }
};

/// Symmetry ||U(-tau) - U^T(tau) - P + tau K0^T W K0|| on [-H, H] and dynamic
/// ||U(tau) - sum U(tau - h_j) A_j|| on [0, H], each on a grid with
/// points_per_segment samples per lattice cell, plus the knot continuity gap.
ResidualReport residuals(const PiecewiseAffineMatrixFunction& u, const ValidatedSystem& sys, const WeightMatrix& w,
                         std::size_t points_per_segment = 50);

/// Uniform samples over [-H, H] plus every knot, sorted and de-duplicated.
std::vector<double> plot_grid(const PiecewiseAffineMatrixFunction& u, std::size_t samples);

}  // namespace ddlyap
