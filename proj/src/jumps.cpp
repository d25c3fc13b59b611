#include "ddlyap/jumps.hpp"

#include "lattice.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlyap {

Matrix JumpSpectrum::at(double tau, Index n, double tol) const {
  for (const auto& [t, j] : entries)
    if (std::abs(t - tau) <= tol) return j;
  return Matrix::Zero(n, n);
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

StabilityReport require_stable(const ValidatedSystem& sys) {
  StabilityReport rep = stability_check(sys);
  if (!rep.stable() || !rep.decay)
    throw Error(ErrorCode::NotStable, std::string("series route needs a stable system with a decay estimate (") +
                                          to_string(rep.method) + ": " + to_string(rep.verdict) + ")");
  return rep;
}

double default_horizon(const DecayEstimate& d) { return std::log(1e12) / d.sigma; }

}  // namespace

JumpSeries::JumpSeries(const ValidatedSystem& sys, const WeightMatrix& w, std::optional<double> horizon)
    : sys_(sys),
      w_(w.matrix()),
      report_(require_stable(sys)),
      decay_(*report_.decay),
      horizon_(horizon.value_or(default_horizon(decay_))),
      jumps_(delta_k(sys, horizon_ + 2.0 * sys.max_delay(), JumpOptions{0.0, {}})),
      k_(fundamental_matrix(sys, horizon_ + 2.0 * sys.max_delay())) {
  if (w.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "W dimension");
  w.require_positive_definite();
}

double JumpSeries::tail_delta(double tau) const {
  const double k0n = spectral_norm(sys_.k0());
  const double g = decay_.gamma;
  const double s = decay_.sigma;
  const double h = decay_.step;
  const double first = std::floor(horizon_ / h) + 1.0;
  const double geo = std::exp(-2.0 * s * h * first) / (1.0 - std::exp(-2.0 * s * h));
  return 4.0 * g * g * k0n * k0n * spectral_norm(w_) * std::exp(-s * tau) * geo;
}

double JumpSeries::tail_prime() const {
  const double k0n = spectral_norm(sys_.k0());
  const double g = decay_.gamma;
  const double s = decay_.sigma;
  const double h = decay_.step;
  const double first = std::floor(horizon_ / h) + 1.0;
  const double geo = std::exp(-s * h * first) / (1.0 - std::exp(-s * h));
  return 2.0 * g * (g + 1.0) * k0n * k0n * spectral_norm(w_) * geo;
}

SeriesValue JumpSeries::delta_u_prime(double tau) const {
  if (std::abs(tau) > 2.0 * sys_.max_delay() * (1.0 + 1e-12))
    throw Error(ErrorCode::OutOfDomain, "series evaluated beyond |tau| <= 2H");
  const Index n = sys_.dim();
  const double tol = detail::lattice_tolerance(sys_.system());
  Matrix acc = Matrix::Zero(n, n);
  double magnitude = 0.0;
  std::size_t terms = 0;
  const double wn = w_.norm();
  for (std::size_t q = 0; q < jumps_.size(); ++q) {
    const double tq = jumps_.instants()[q];
    if (tq > horizon_ + tol) break;
    const Matrix* shifted = jumps_.find(tq + tau);
    if (shifted == nullptr) continue;
    const Matrix& dk = jumps_.jumps()[q];
    acc.noalias() -= dk.transpose() * w_ * *shifted;
    magnitude += dk.norm() * wn * shifted->norm();
    ++terms;
  }
  const double rounding = static_cast<double>(terms + 2 * n) * static_cast<double>(n) * kEps * magnitude;
  return {acc, tail_delta(tau) + rounding};
}

SeriesValue JumpSeries::u_prime(double tau, Side side) const {
  if (std::abs(tau) > 2.0 * sys_.max_delay() * (1.0 + 1e-12))
    throw Error(ErrorCode::OutOfDomain, "series evaluated beyond |tau| <= 2H");
  const Index n = sys_.dim();
  const double tol = detail::lattice_tolerance(sys_.system());
  const Matrix& k0 = sys_.k0();
  Matrix acc = Matrix::Zero(n, n);
  double magnitude = 0.0;
  std::size_t terms = 0;
  for (std::size_t q = 0; q < jumps_.size(); ++q) {
    const double tk = jumps_.instants()[q];
    if (tk > horizon_ + tol) break;
    const double arg = tk - tau;
    const Matrix& kv = (side == Side::Right) ? k_.left_limit(arg) : k_(arg);
    const Matrix diff = kv - k0;
    const Matrix& dk = jumps_.jumps()[q];
    acc.noalias() += diff.transpose() * w_ * dk;
    magnitude += diff.norm() * w_.norm() * dk.norm();
    ++terms;
  }
  const double rounding = static_cast<double>(terms + 2 * n) * static_cast<double>(n) * kEps * magnitude;
  return {acc, tail_prime() + rounding};
}

SeriesValue delta_u_prime(const ValidatedSystem& sys, const WeightMatrix& w, double tau,
                          std::optional<double> horizon) {
  return JumpSeries(sys, w, horizon).delta_u_prime(tau);
}

SeriesValue u_prime_series(const ValidatedSystem& sys, const WeightMatrix& w, double tau,
                           std::optional<double> horizon) {
  return JumpSeries(sys, w, horizon).u_prime(tau);
}

JumpSpectrum jumps_from_segments(const PiecewiseAffineMatrixFunction& u, double drop_tol) {
  double scale = 0.0;
  for (int k = -u.m(); k < u.m(); ++k) scale = std::max(scale, max_abs(u.slope(k)));
  const double cutoff = drop_tol * (1.0 + scale);
  JumpSpectrum out;
  for (int k = -u.m() + 1; k < u.m(); ++k) {
    Matrix jump = u.slope(k) - u.slope(k - 1);
    if (max_abs(jump) > cutoff) out.entries.emplace_back(k * u.basic_delay(), std::move(jump));
  }
  return out;
}

JumpSpectrum series_spectrum(const JumpSeries& series, const std::vector<double>& taus) {
  JumpSpectrum out;
  out.horizon = series.horizon();
  std::vector<double> sorted = taus;
  std::sort(sorted.begin(), sorted.end());
  for (double tau : sorted) {
    SeriesValue v = series.delta_u_prime(tau);
    out.bound = std::max(out.bound, v.bound);
    out.entries.emplace_back(tau, std::move(v.value));
  }
  return out;
}

JumpPropertyReport check_jump_properties(const JumpSeries& series, const std::vector<double>& tau_grid) {
  const ValidatedSystem& sys = series.system();
  const Matrix& w = series.weight();
  const Index n = sys.dim();
  const double tol = detail::lattice_tolerance(sys.system());
  JumpPropertyReport rep;

  const auto du = [&](double tau) {
    SeriesValue v = series.delta_u_prime(tau);
    rep.bound = std::max(rep.bound, v.bound);
    return v.value;
  };

  for (double tau : tau_grid) {
    ++rep.points;
    const Matrix at = du(tau);
    rep.symmetry = std::max(rep.symmetry, max_abs(du(-tau) - at.transpose()));

    if (tau > tol) {
      Matrix rhs = Matrix::Zero(n, n);
      for (const auto& t : sys.terms()) rhs.noalias() += du(tau - t.delay.value()) * t.coeff;
      rep.dynamic = std::max(rep.dynamic, max_abs(at - rhs));
    } else if (tau < -tol) {
      Matrix rhs = Matrix::Zero(n, n);
      for (const auto& t : sys.terms()) rhs.noalias() += t.coeff.transpose() * du(tau + t.delay.value());
      rep.dynamic = std::max(rep.dynamic, max_abs(at - rhs));
    }

    if (tau >= -tol) {
      Matrix lhs = -at;
      for (const auto& ti : sys.terms())
        for (const auto& tj : sys.terms())
          lhs.noalias() += ti.coeff.transpose() * du(tau + ti.delay.value() - tj.delay.value()) * tj.coeff;
      rep.algebraic = std::max(rep.algebraic, max_abs(lhs - w * series.delta_k_table().at(tau)));
    }
  }

  const Matrix d0 = du(0.0);
  const Matrix neg = -(d0 + w);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (neg + neg.transpose()), Eigen::EigenvaluesOnly);
  rep.psd_margin = es.eigenvalues()(0);
  return rep;
}

JumpPropertyReport check_jump_properties(const ValidatedSystem& sys, const WeightMatrix& w,
                                         std::optional<double> horizon, const std::vector<double>& tau_grid) {
  return check_jump_properties(JumpSeries(sys, w, horizon), tau_grid);
}

std::vector<double> knot_grid(const ValidatedSystem& sys) {
  double h = sys.max_delay();
  int m = 1;
  if (sys.size() > 1) {
    const CommensurateForm cf = to_commensurate(sys);
    h = cf.h();
    m = cf.m;
  }
  std::vector<double> out;
  for (int k = -m; k <= m; ++k) out.push_back(k * h);
  return out;
}

}  // namespace ddlyap
