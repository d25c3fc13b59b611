#include "ddlyap/lyapunov.hpp"

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlyap {

PiecewiseAffineMatrixFunction::PiecewiseAffineMatrixFunction(double basic_delay, int m, std::vector<Matrix> offsets,
                                                             std::vector<Matrix> slopes)
    : h_(basic_delay), m_(m), offsets_(std::move(offsets)), slopes_(std::move(slopes)) {
  if (m_ < 1 || offsets_.size() != static_cast<std::size_t>(2 * m_) || slopes_.size() != offsets_.size())
    throw Error(ErrorCode::DimensionMismatch, "expected 2m segments");
  if (!(h_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "basic delay must be positive");
}

Matrix PiecewiseAffineMatrixFunction::operator()(double tau) const {
  const double big_h = max_delay();
  if (!(std::abs(tau) <= big_h * (1.0 + 1e-12)))
    throw Error(ErrorCode::OutOfDomain, "tau = " + std::to_string(tau) + " outside [-H, H]");
  const int k = std::clamp(static_cast<int>(std::floor(tau / h_)), -m_, m_ - 1);
  const double xi = tau - k * h_;
  return offset(k) + xi * slope(k);
}

PiecewiseAffineMatrixFunction operator+(const PiecewiseAffineMatrixFunction& a,
                                        const PiecewiseAffineMatrixFunction& b) {
  if (a.m_ != b.m_ || a.h_ != b.h_ || a.dim() != b.dim())
    throw Error(ErrorCode::DimensionMismatch, "segment layouts differ");
  std::vector<Matrix> c(a.offsets_.size()), d(a.slopes_.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = a.offsets_[i] + b.offsets_[i];
    d[i] = a.slopes_[i] + b.slopes_[i];
  }
  return PiecewiseAffineMatrixFunction(a.h_, a.m_, std::move(c), std::move(d));
}

Matrix evaluate(const PiecewiseAffineMatrixFunction& u, double tau) { return u(tau); }

Matrix p_matrix(const ValidatedSystem& sys, const WeightMatrix& w) {
  if (w.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "W dimension");
  const Matrix& k0 = sys.k0();
  const Matrix& wm = w.matrix();
  Matrix bracket = Matrix::Zero(sys.dim(), sys.dim());
  for (const auto& t : sys.terms())
    bracket += t.delay.value() * (wm * k0 * t.coeff - t.coeff.transpose() * k0.transpose() * wm);
  return k0.transpose() * bracket * k0;
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index offset, Index n) {
  return Eigen::Map<const Matrix>(v.data() + offset, n, n);
}

// Hager's estimate of ||M^-1||_1 from solves with M and M^T.
template <class Solve, class SolveT>
double inverse_norm1_estimate(Index size, Solve solve, SolveT solve_t) {
  Vector x = Vector::Constant(size, 1.0 / static_cast<double>(size));
  double est = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Vector y = solve(x);
    if (!y.allFinite()) return std::numeric_limits<double>::infinity();
    est = y.lpNorm<1>();
    const Vector sgn = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Vector z = solve_t(sgn);
    Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x(j) = 1.0;
  }
  return est;
}

struct SolveResult {
  Vector constant;
  Vector linear;
  double condition;
  bool sparse;
};

double norm1(const SparseMatrix& m) {
  double best = 0.0;
  for (Index c = 0; c < m.outerSize(); ++c) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

SolveResult solve_pair(const SparseMatrix& m, const Vector& b_const, const Vector& b_lin, const BuildOptions& opts) {
  const auto unknowns = static_cast<std::size_t>(m.rows());
  if (unknowns > opts.max_unknowns || (unknowns > opts.dense_limit && !opts.sparse_enabled))
    throw Error(ErrorCode::SizeExceeded, std::to_string(unknowns) + " unknowns exceeds the configured cap");

  SolveResult out{};
  if (unknowns <= opts.dense_limit) {
    const Matrix dense(m);
    Eigen::PartialPivLU<Matrix> lu(dense);
    const double rc = lu.rcond();
    out.condition = (rc > 0.0 && std::isfinite(rc)) ? 1.0 / rc : std::numeric_limits<double>::infinity();
    // rcond() is unreliable once a pivot vanishes; check the pivots directly.
    const double pivot_floor = static_cast<double>(dense.rows()) * std::numeric_limits<double>::epsilon() *
                               dense.cwiseAbs().colwise().sum().maxCoeff();
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= pivot_floor)
      out.condition = std::numeric_limits<double>::infinity();
    if (std::isfinite(out.condition)) {
      out.constant = lu.solve(b_const);
      out.linear = lu.solve(b_lin);
    }
    out.sparse = false;
  } else {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(m);
    lu.factorize(m);
    if (lu.info() != Eigen::Success) {
      out.condition = std::numeric_limits<double>::infinity();
    } else {
      const double inv = inverse_norm1_estimate(
          m.rows(), [&](const Vector& v) { return Vector(lu.solve(v)); },
          [&](const Vector& v) { return Vector(lu.transpose().solve(v)); });
      out.condition = norm1(m) * inv;
      out.constant = lu.solve(b_const);
      out.linear = lu.solve(b_lin);
    }
    out.sparse = true;
  }
  if (!std::isfinite(out.condition) || out.condition > opts.fail_condition || !out.constant.allFinite() ||
      !out.linear.allFinite())
    throw Error(ErrorCode::CriticalSystem, "Lyapunov system is singular or ill-conditioned (condition estimate " +
                                               std::to_string(out.condition) + ")");
  return out;
}

void add_block(std::vector<Triplet>& trips, Index row0, Index col0, const Matrix& block) {
  for (Index c = 0; c < block.cols(); ++c)
    for (Index r = 0; r < block.rows(); ++r)
      if (block(r, c) != 0.0) trips.emplace_back(row0 + r, col0 + c, block(r, c));
}

PiecewiseAffineMatrixFunction finish(double h, int m, Index n, const SolveResult& sol) {
  const Index n2 = n * n;
  std::vector<Matrix> c, d;
  c.reserve(static_cast<std::size_t>(2 * m));
  d.reserve(static_cast<std::size_t>(2 * m));
  for (int b = 0; b < 2 * m; ++b) {
    c.push_back(unvec(sol.constant, b * n2, n));
    d.push_back(unvec(sol.linear, b * n2, n));
  }
  PiecewiseAffineMatrixFunction u(h, m, std::move(c), std::move(d));
  u.condition_estimate = sol.condition;
  u.sparse_solve = sol.sparse;
  u.unknowns = static_cast<std::size_t>(2 * m * n2);
  return u;
}

void check_weight(const ValidatedSystem& sys, const WeightMatrix& w) {
  if (w.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "W dimension");
  w.require_positive_definite();
}

}  // namespace

PiecewiseAffineMatrixFunction build_single_delay(const ValidatedSystem& sys, const WeightMatrix& w,
                                                 const BuildOptions& opts) {
  if (sys.size() != 1) throw Error(ErrorCode::InvalidArgument, "build_single_delay needs exactly one delay");
  check_weight(sys, w);
  const Index n = sys.dim();
  const Index n2 = n * n;
  const Matrix& a = sys.terms().front().coeff;
  const double big_h = sys.max_delay();
  const Matrix& k0 = sys.k0();
  const Matrix& wm = w.matrix();
  const Matrix k0_inv = a - Matrix::Identity(n, n);
  const Matrix p = p_matrix(sys, w);
  const Matrix eye = Matrix::Identity(n, n);

  //  [ I(x)I     -A^T(x)I ] [y]   [ 0                                   ]
  //  [ -I(x)A^T   I(x)I   ] [z] = [ -vec(K0^-T P + (xi I + H K0^T) W K0) ]
  Matrix big = Matrix::Identity(2 * n2, 2 * n2);
  big.block(0, n2, n2, n2) = -Eigen::kroneckerProduct(a.transpose(), eye).eval();
  big.block(n2, 0, n2, n2) = -Eigen::kroneckerProduct(eye, a.transpose()).eval();

  Vector b_const = Vector::Zero(2 * n2);
  Vector b_lin = Vector::Zero(2 * n2);
  b_const.tail(n2) = -vec(k0_inv.transpose() * p + big_h * k0.transpose() * wm * k0);
  b_lin.tail(n2) = -vec(wm * k0);

  SolveResult sol = solve_pair(big.sparseView(), b_const, b_lin, opts);
  // Solution ordering is [y; z] = [U(xi); U(xi - H)]; segments run k = -1, 0.
  Vector c(2 * n2), d(2 * n2);
  c << sol.constant.tail(n2), sol.constant.head(n2);
  d << sol.linear.tail(n2), sol.linear.head(n2);
  sol.constant = c;
  sol.linear = d;
  PiecewiseAffineMatrixFunction u = finish(big_h, 1, n, sol);
  u.condition_warning = sol.condition > opts.warn_condition;
  return u;
}

PiecewiseAffineMatrixFunction build_commensurate(const CommensurateForm& cf, const WeightMatrix& w,
                                                 const BuildOptions& opts) {
  const ValidatedSystem& sys = cf.system;
  check_weight(sys, w);
  const Index n = sys.dim();
  const Index n2 = n * n;
  const int m = cf.m;
  const double h = cf.h();
  const Matrix& k0 = sys.k0();
  const Matrix& wm = w.matrix();
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix k0_inv = sys.system().coeff_sum() - eye;
  const Matrix p = p_matrix(sys, w);

  const auto unknowns = static_cast<std::size_t>(2 * m) * static_cast<std::size_t>(n2);
  if (unknowns > opts.max_unknowns || (unknowns > opts.dense_limit && !opts.sparse_enabled))
    throw Error(ErrorCode::SizeExceeded, std::to_string(unknowns) + " unknowns exceeds the configured cap");

  Matrix weighted_sum = Matrix::Zero(n, n);  // sum_j h_j A_j^T K0^T
  for (const auto& t : sys.terms()) weighted_sum += t.delay.value() * t.coeff.transpose() * k0.transpose();

  struct Coupling {
    int j;
    Matrix right;  // A_j^T (x) I
    Matrix left;   // I (x) A_j^T
  };
  std::vector<Coupling> couplings;
  for (int j = 1; j <= m; ++j) {
    const Matrix& aj = cf.coeffs[static_cast<std::size_t>(j - 1)];
    if (aj.isZero(0.0)) continue;
    couplings.push_back(
        {j, Eigen::kroneckerProduct(aj.transpose(), eye).eval(), Eigen::kroneckerProduct(eye, aj.transpose()).eval()});
  }

  const auto col = [&](int k) { return static_cast<Index>(k + m) * n2; };
  std::vector<Triplet> trips;
  trips.reserve(unknowns * (1 + 2 * couplings.size() * static_cast<std::size_t>(n)));
  Vector b_const = Vector::Zero(static_cast<Index>(unknowns));
  Vector b_lin = Vector::Zero(static_cast<Index>(unknowns));

  // Y_k - sum_j Y_{k-j} A_j = 0, k = 0..m-1
  for (int k = 0; k < m; ++k) {
    const Index row = static_cast<Index>(k) * n2;
    for (Index i = 0; i < n2; ++i) trips.emplace_back(row + i, col(k) + i, 1.0);
    for (const auto& c : couplings) add_block(trips, row, col(k - c.j), -c.right);
  }
  // Y_{-k} - sum_j A_j^T Y_{-k+j} = -K0^-T P - ((xi - k h) I + sum_j h_j A_j^T K0^T) W K0, k = 1..m
  const Matrix common = -k0_inv.transpose() * p - weighted_sum * wm * k0;
  const Vector lin = -vec(wm * k0);
  for (int k = 1; k <= m; ++k) {
    const Index row = static_cast<Index>(m + k - 1) * n2;
    for (Index i = 0; i < n2; ++i) trips.emplace_back(row + i, col(-k) + i, 1.0);
    for (const auto& c : couplings) add_block(trips, row, col(-k + c.j), -c.left);
    b_const.segment(row, n2) = vec(common + (k * h) * wm * k0);
    b_lin.segment(row, n2) = lin;
  }

  SparseMatrix big(static_cast<Index>(unknowns), static_cast<Index>(unknowns));
  big.setFromTriplets(trips.begin(), trips.end());
  big.makeCompressed();
  const SolveResult sol = solve_pair(big, b_const, b_lin, opts);
  PiecewiseAffineMatrixFunction u = finish(h, m, n, sol);
  u.condition_warning = sol.condition > opts.warn_condition;
  return u;
}

PiecewiseAffineMatrixFunction build_lyapunov(const ValidatedSystem& sys, const WeightMatrix& w,
                                             const BuildOptions& opts) {
  if (sys.size() == 1) return build_single_delay(sys, w, opts);
  return build_commensurate(to_commensurate(sys), w, opts);
}

// ---------------------------------------------------------------------------

ResidualReport residuals(const PiecewiseAffineMatrixFunction& u, const ValidatedSystem& sys, const WeightMatrix& w,
                         std::size_t points_per_segment) {
  if (u.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "U and system dimensions differ");
  points_per_segment = std::max<std::size_t>(points_per_segment, 2);
  const Matrix p = p_matrix(sys, w);
  const Matrix& k0 = sys.k0();
  const Matrix kwk = k0.transpose() * w.matrix() * k0;
  const double h = u.basic_delay();
  const double big_h = u.max_delay();

  ResidualReport rep;
  rep.condition_estimate = u.condition_estimate;
  rep.points_per_segment = points_per_segment;
  for (int k = -u.m(); k < u.m(); ++k) {
    for (std::size_t i = 0; i < points_per_segment; ++i) {
      const double xi = h * static_cast<double>(i) / static_cast<double>(points_per_segment - 1);
      const double tau = std::clamp(k * h + xi, -big_h, big_h);
      ++rep.grid_points;
      const Matrix ut = u(tau);
      rep.symmetry = std::max(rep.symmetry, max_abs(u(-tau) - ut.transpose() - p + tau * kwk));
      if (tau >= 0.0) {
        Matrix rhs = Matrix::Zero(sys.dim(), sys.dim());
        for (const auto& t : sys.terms()) rhs.noalias() += u(std::max(tau - t.delay.value(), -big_h)) * t.coeff;
        rep.dynamic = std::max(rep.dynamic, max_abs(ut - rhs));
      }
    }
  }
  for (int k = -u.m(); k < u.m() - 1; ++k)
    rep.continuity = std::max(rep.continuity, max_abs(u.offset(k) + h * u.slope(k) - u.offset(k + 1)));
  return rep;
}

std::vector<double> plot_grid(const PiecewiseAffineMatrixFunction& u, std::size_t samples) {
  const double big_h = u.max_delay();
  std::vector<double> grid;
  samples = std::max<std::size_t>(samples, 2);
  for (std::size_t i = 0; i < samples; ++i)
    grid.push_back(-big_h + 2.0 * big_h * static_cast<double>(i) / static_cast<double>(samples - 1));
  for (int k = -u.m(); k <= u.m(); ++k) grid.push_back(k * u.basic_delay());
  std::sort(grid.begin(), grid.end());
  const double tol = 1e-12 * big_h;
  std::vector<double> out;
  for (double t : grid)
    if (out.empty() || t - out.back() > tol) out.push_back(std::clamp(t, -big_h, big_h));
  return out;
}

}  // namespace ddlyap
