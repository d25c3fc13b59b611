#include "ddlyap/oracle.hpp"

#include "lattice.hpp"

#include <algorithm>
#include <cmath>

namespace ddlyap {

namespace {

constexpr std::size_t kMaxBreakpoints = 100'000;

StabilityReport require_stable(const ValidatedSystem& sys) {
  StabilityReport rep = stability_check(sys);
  if (!rep.stable() || !rep.decay)
    throw Error(ErrorCode::NotStable, std::string("the defining integral needs a stable system (") +
                                          to_string(rep.method) + ": " + to_string(rep.verdict) + ")");
  return rep;
}

double pick_horizon(const ValidatedSystem& sys, const DecayEstimate& d, std::optional<double> requested) {
  if (requested) {
    if (!(*requested >= sys.max_delay()))
      throw Error(ErrorCode::InvalidArgument, "oracle horizon must be at least H");
    return *requested;
  }
  // lattice points are multiples of the fitted step, so this caps breakpoints
  const double cap = static_cast<double>(kMaxBreakpoints) * d.step;
  return std::max(sys.max_delay(), std::min(std::log(1e12) / d.sigma, cap));
}

}  // namespace

IntegralOracle::IntegralOracle(const ValidatedSystem& sys, const WeightMatrix& w, std::optional<double> horizon)
    : sys_(sys),
      w_(w.matrix()),
      report_(require_stable(sys)),
      decay_(*report_.decay),
      horizon_(pick_horizon(sys, decay_, horizon)),
      k_(fundamental_matrix(sys, horizon_ + sys.max_delay())) {
  if (w.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "W dimension");
}

double IntegralOracle::u_tail_bound(double tau) const {
  const double k0n = spectral_norm(sys_.k0());
  const double g = decay_.gamma;
  const double s = decay_.sigma;
  const double t = horizon_;
  return spectral_norm(w_) * g * k0n * k0n * std::exp(-s * tau) *
         (g * std::exp(-2.0 * s * t) / (2.0 * s) + std::exp(-s * t) / s);
}

OracleValue IntegralOracle::u(double tau) const {
  const double big_h = sys_.max_delay();
  if (!(std::abs(tau) <= big_h * (1.0 + 1e-12))) throw Error(ErrorCode::OutOfDomain, "oracle tau outside [-H, H]");
  const double t_end = horizon_;
  const auto& breaks = k_.breakpoints();

  // Partition of [0, T] by the jumps of K(t) and of K(t + tau).
  std::vector<double> cuts{0.0, t_end};
  for (double b : breaks) {
    if (b > 0.0 && b < t_end) cuts.push_back(b);
    const double shifted = b - tau;
    if (shifted > 0.0 && shifted < t_end) cuts.push_back(shifted);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const Matrix& k0 = sys_.k0();
  Matrix acc = Matrix::Zero(sys_.dim(), sys_.dim());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double len = cuts[i + 1] - a;
    // Values are constant on the open piece; sample its midpoint.
    const double mid = a + 0.5 * len;
    acc.noalias() += len * ((k_(mid) - k0).transpose() * w_ * k_(mid + tau));
  }
  return {acc, u_tail_bound(tau), t_end};
}

OracleValue IntegralOracle::p() const {
  const double t_end = horizon_;
  const auto& breaks = k_.breakpoints();
  const Matrix& k0 = sys_.k0();
  Matrix integral = Matrix::Zero(sys_.dim(), sys_.dim());  // int_0^T K dt
  for (std::size_t i = 0; i < breaks.size() && breaks[i] < t_end; ++i) {
    const double next = (i + 1 < breaks.size()) ? std::min(breaks[i + 1], t_end) : t_end;
    integral += (next - breaks[i]) * k_.values()[i];
  }
  const Matrix value = integral.transpose() * w_ * k0 - k0.transpose() * w_ * integral;
  const double k0n = spectral_norm(k0);
  const double tail = 2.0 * decay_.gamma * k0n * k0n * spectral_norm(w_) * std::exp(-decay_.sigma * t_end) /
                      decay_.sigma;
  return {value, tail, t_end};
}

OracleValue u_integral_oracle(const ValidatedSystem& sys, const WeightMatrix& w, double tau,
                              std::optional<double> horizon) {
  return IntegralOracle(sys, w, horizon).u(tau);
}

OracleValue p_integral_oracle(const ValidatedSystem& sys, const WeightMatrix& w, std::optional<double> horizon) {
  return IntegralOracle(sys, w, horizon).p();
}

CrossCheckReport cross_check(const PiecewiseAffineMatrixFunction& u, const ValidatedSystem& sys,
                             const WeightMatrix& w, const std::vector<double>& grid, std::optional<double> horizon,
                             double tolerance) {
  const IntegralOracle oracle(sys, w, horizon);
  CrossCheckReport rep;
  rep.horizon = oracle.horizon();
  rep.tolerance = tolerance;
  for (double tau : grid) {
    const OracleValue ref = oracle.u(tau);
    const double err = max_abs(u(tau) - ref.value);
    rep.taus.push_back(tau);
    rep.errors.push_back(err);
    rep.max_error = std::max(rep.max_error, err);
    rep.tail_bound = std::max(rep.tail_bound, ref.tail_bound);
  }
  return rep;
}

}  // namespace ddlyap
