#pragma once

#include "ddlyap/lyapunov.hpp"
#include "ddlyap/rational.hpp"
#include "ddlyap/system.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ddlyap {

struct ContinuedFraction {
  std::vector<std::int64_t> terms;  // lambda_0; lambda_1, lambda_2, ...
  double source = 0.0;
  bool terminated = false;  // expansion reached the value exactly (in double precision)
};

/// Euclidean expansion of x > 0, at most s_max + 1 terms (s_max <= 64).
ContinuedFraction continued_fraction(double x, int s_max = 64);

/// p_s / q_s from the standard recurrence. Orders past a terminated expansion
/// return the exact value; otherwise OrderUnavailable (also on 64-bit overflow).
Rational convergent(const ContinuedFraction& cf, int s);

struct ApproximationOptions {
  int max_m = 100'000;
};

/// Replaces every float delay by its order-s convergent (exact delays are kept)
/// and rewrites the result on h = gcd of the rationalized delays.
CommensurateForm approximate_system(const ValidatedSystem& sys, int s, const ApproximationOptions& opts = {});

struct ApproximationStep {
  int s;
  std::vector<Rational> delays;
  Rational basic_delay;
  int m;
  PiecewiseAffineMatrixFunction u;
  ResidualReport residual;
  StabilityReport stability;
  std::optional<double> sup_diff;  // vs previous order; absent for the first
};

struct SequenceOptions {
  std::size_t grid_points = 400;
  std::size_t residual_density = 50;
  bool with_stability = true;
  BuildOptions build{};
  ApproximationOptions approx{};
};

struct SequenceResult {
  std::vector<ApproximationStep> steps;
  bool stability_disagreement = false;
};

SequenceResult u_sequence(const ValidatedSystem& sys, const WeightMatrix& w, const std::vector<int>& orders,
                          const SequenceOptions& opts = {});

/// Entrywise max |a(tau) - b(tau)| on `points` uniform samples of the shared domain.
double sup_difference(const PiecewiseAffineMatrixFunction& a, const PiecewiseAffineMatrixFunction& b,
                      std::size_t points = 400);

}  // namespace ddlyap
