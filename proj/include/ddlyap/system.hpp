#pragma once

#include "ddlyap/core.hpp"
#include "ddlyap/rational.hpp"

#include <optional>
#include <vector>

namespace ddlyap {

/// A delay value, either exact (rational) or a floating real.
class Delay {
 public:
  static Delay exact(Rational r);
  static Delay real(double value);

  double value() const noexcept { return value_; }
  const std::optional<Rational>& rational() const noexcept { return rational_; }
  bool is_rational() const noexcept { return rational_.has_value(); }

 private:
  Delay(double v, std::optional<Rational> r) : value_(v), rational_(r) {}
  double value_ = 0.0;
  std::optional<Rational> rational_;
};

struct DelayTerm {
  Delay delay;
  Matrix coeff;
};

/// x(t) = sum_j A_j x(t - h_j), 0 < h_1 < ... < h_m = H.
///
/// The constructor enforces the structural invariants (non-empty, square
/// coefficients of a common size, finite entries, strictly increasing positive
/// delays); the determinant hypothesis is checked separately by validate().
class DelaySystem {
 public:
  explicit DelaySystem(std::vector<DelayTerm> terms);

  Index dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<DelayTerm>& terms() const noexcept { return terms_; }
  const DelayTerm& term(std::size_t j) const { return terms_.at(j); }

  double max_delay() const noexcept { return terms_.back().delay.value(); }
  double min_delay() const noexcept { return terms_.front().delay.value(); }
  std::vector<double> delays() const;
  bool all_rational() const noexcept;
  Matrix coeff_sum() const;

  /// Tolerance used to merge nearly coincident lattice instants.
  double merge_tolerance() const noexcept { return 1e-9 * max_delay(); }

 private:
  std::vector<DelayTerm> terms_;
  Index n_ = 0;
};

/// A DelaySystem known to satisfy det(sum A_j - I) != 0, with K0 cached.
class ValidatedSystem {
 public:
  const DelaySystem& system() const noexcept { return sys_; }
  const Matrix& k0() const noexcept { return k0_; }

  Index dim() const noexcept { return sys_.dim(); }
  std::size_t size() const noexcept { return sys_.size(); }
  const std::vector<DelayTerm>& terms() const noexcept { return sys_.terms(); }
  double max_delay() const noexcept { return sys_.max_delay(); }

 private:
  friend ValidatedSystem validate(const DelaySystem& sys);
  ValidatedSystem(DelaySystem sys, Matrix k0) : sys_(std::move(sys)), k0_(std::move(k0)) {}

  DelaySystem sys_;
  Matrix k0_;
};

/// Throws SingularK0 when |det(sum A_j - I)| <= 1e-12 * ||sum A_j - I||^n.
ValidatedSystem validate(const DelaySystem& sys);

/// K0 = (sum A_j - I)^-1.
inline const Matrix& k0(const ValidatedSystem& sys) { return sys.k0(); }

/// Symmetric weight W. Symmetry is exact at construction; positive
/// definiteness is checked by require_positive_definite() at use.
class WeightMatrix {
 public:
  explicit WeightMatrix(Matrix w);
  static WeightMatrix identity(Index n) { return WeightMatrix(Matrix::Identity(n, n)); }

  const Matrix& matrix() const noexcept { return w_; }
  Index dim() const noexcept { return w_.rows(); }
  void require_positive_definite() const;

  friend WeightMatrix operator+(const WeightMatrix& a, const WeightMatrix& b) {
    return WeightMatrix(a.w_ + b.w_);
  }

 private:
  Matrix w_;
};

/// Right-continuous bounded initial function on [-H, 0). Each piece holds
/// value + (s - start) * slope on [start, next start).
class InitialFunction {
 public:
  struct Piece {
    double start;
    Vector value;
    Vector slope;  // empty means constant
  };

  static InitialFunction constant(Vector value, double max_delay);
  static InitialFunction piecewise(std::vector<Piece> pieces, double max_delay);

  Index dim() const noexcept { return pieces_.front().value.size(); }
  double max_delay() const noexcept { return max_delay_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  /// Value at s in [-H, 0); breakpoints within tol of s count as reached.
  Vector operator()(double s, double tol = 0.0) const;

 private:
  InitialFunction(std::vector<Piece> pieces, double max_delay);
  std::vector<Piece> pieces_;
  double max_delay_;
};

enum class StabilityMethod { SingleDelaySpectral, CommensurateCompanion, TorusGridHeuristic };
enum class Verdict { Stable, Unstable, Inconclusive };

const char* to_string(StabilityMethod m) noexcept;
const char* to_string(Verdict v) noexcept;

/// ||K(t)|| <= gamma ||K0|| exp(-sigma t) for t >= 0; step is the lattice
/// spacing the constants were fitted on.
struct DecayEstimate {
  double gamma;
  double sigma;
  double step;
};

struct StabilityReport {
  StabilityMethod method;
  double spectral_radius;
  Verdict verdict;
  std::optional<DecayEstimate> decay;
  std::size_t grid_points = 0;  // torus heuristic only

  bool stable() const noexcept { return verdict == Verdict::Stable; }
};

struct StabilityOptions {
  std::size_t torus_points = 64;       // per delay dimension
  std::size_t torus_total_cap = 1u << 20;
  double torus_margin = 1e-3;
  double spectral_margin = 1e-12;
  double decay_slack = 0.25;           // rho_eff = rho + slack * (1 - rho)
};

StabilityReport stability_check(const DelaySystem& sys, const StabilityOptions& opts = {});
inline StabilityReport stability_check(const ValidatedSystem& sys, const StabilityOptions& opts = {}) {
  return stability_check(sys.system(), opts);
}

/// Exact rewrite x(t) = sum_{j=1..m} A_j x(t - j h) on the basic delay h.
struct CommensurateForm {
  Rational basic_delay;
  int m = 0;
  std::vector<Matrix> coeffs;         // coeffs[j-1] multiplies x(t - j h); zeros allowed
  std::vector<Rational> delays;       // the rational delays, one per origin entry
  std::vector<int> indices;           // delays[i] == indices[i] * basic_delay
  ValidatedSystem system;             // origin matrices on the rational delays
  DelaySystem origin;

  Index dim() const noexcept { return system.dim(); }
  double h() const noexcept { return basic_delay.to_double(); }
};

/// Throws NonRationalInput when the list is empty or its length differs from
/// the number of entries.
CommensurateForm to_commensurate(const ValidatedSystem& sys, const std::vector<Rational>& rational_delays);
/// Uses the system's own delays; every delay must be exact.
CommensurateForm to_commensurate(const ValidatedSystem& sys);

/// nm x nm block companion of the h-step recursion.
Matrix companion_matrix(const std::vector<Matrix>& coeffs);

}  // namespace ddlyap
