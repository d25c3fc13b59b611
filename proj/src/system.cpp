#include "ddlyap/system.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ddlyap {

Delay Delay::exact(Rational r) {
  if (r <= Rational(0)) throw Error(ErrorCode::NonincreasingDelays, "delay must be positive, got " + r.str());
  return Delay(r.to_double(), r);
}

Delay Delay::real(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "delay is not finite");
  if (value <= 0.0) throw Error(ErrorCode::NonincreasingDelays, "delay must be positive");
  return Delay(value, std::nullopt);
}

DelaySystem::DelaySystem(std::vector<DelayTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw Error(ErrorCode::DimensionMismatch, "system needs at least one delay term");
  n_ = terms_.front().coeff.rows();
  if (n_ == 0) throw Error(ErrorCode::DimensionMismatch, "state dimension must be positive");
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& t = terms_[j];
    if (t.coeff.rows() != n_ || t.coeff.cols() != n_)
      throw Error(ErrorCode::DimensionMismatch, "coefficient " + std::to_string(j + 1) + " is not " +
                                                    std::to_string(n_) + "x" + std::to_string(n_));
    if (!t.coeff.allFinite()) throw Error(ErrorCode::NonFinite, "coefficient has NaN/Inf entries");
    if (j > 0) {
      const auto& prev = terms_[j - 1].delay;
      const bool increasing = (prev.is_rational() && t.delay.is_rational())
                                  ? *prev.rational() < *t.delay.rational()
                                  : prev.value() < t.delay.value();
      if (!increasing) throw Error(ErrorCode::NonincreasingDelays, "delays must be strictly increasing");
    }
  }
}

std::vector<double> DelaySystem::delays() const {
  std::vector<double> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.delay.value());
  return out;
}

bool DelaySystem::all_rational() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(), [](const DelayTerm& t) { return t.delay.is_rational(); });
}

Matrix DelaySystem::coeff_sum() const {
  Matrix s = Matrix::Zero(n_, n_);
  for (const auto& t : terms_) s += t.coeff;
  return s;
}

ValidatedSystem validate(const DelaySystem& sys) {
  const Index n = sys.dim();
  const Matrix m = sys.coeff_sum() - Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(m);
  const double det = lu.determinant();
  const double scale = std::pow(spectral_norm(m), static_cast<double>(n));
  if (!(std::abs(det) > 1e-12 * scale))
    throw Error(ErrorCode::SingularK0, "det(sum A_j - I) vanishes; K0 is undefined");
  return ValidatedSystem(sys, lu.inverse());
}

WeightMatrix::WeightMatrix(Matrix w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols() || w_.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "W must be square");
  if (!w_.allFinite()) throw Error(ErrorCode::NonFinite, "W has NaN/Inf entries");
  if (w_ != w_.transpose()) throw Error(ErrorCode::NotPositiveDefinite, "W must be exactly symmetric");
}

void WeightMatrix::require_positive_definite() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) <= 0.0) throw Error(ErrorCode::NotPositiveDefinite, "W is not positive definite");
}

// ---------------------------------------------------------------------------

InitialFunction::InitialFunction(std::vector<Piece> pieces, double max_delay)
    : pieces_(std::move(pieces)), max_delay_(max_delay) {}

InitialFunction InitialFunction::constant(Vector value, double max_delay) {
  return piecewise({Piece{-max_delay, std::move(value), Vector()}}, max_delay);
}

InitialFunction InitialFunction::piecewise(std::vector<Piece> pieces, double max_delay) {
  if (pieces.empty()) throw Error(ErrorCode::InvalidArgument, "initial function needs at least one piece");
  const double tol = 1e-12 * max_delay;
  if (std::abs(pieces.front().start + max_delay) > tol)
    throw Error(ErrorCode::InvalidArgument, "initial function must start at -H");
  pieces.front().start = -max_delay;
  const Index n = pieces.front().value.size();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (p.value.size() != n || (p.slope.size() != 0 && p.slope.size() != n))
      throw Error(ErrorCode::DimensionMismatch, "initial function pieces disagree on dimension");
    if (!p.value.allFinite() || !p.slope.allFinite()) throw Error(ErrorCode::NonFinite, "initial function value");
    if (p.start >= 0.0) throw Error(ErrorCode::InvalidArgument, "initial function breakpoints must lie in [-H, 0)");
    if (i > 0 && !(p.start > pieces[i - 1].start))
      throw Error(ErrorCode::InvalidArgument, "initial function breakpoints must increase");
  }
  return InitialFunction(std::move(pieces), max_delay);
}

Vector InitialFunction::operator()(double s, double tol) const {
  if (s < -max_delay_ - tol || s >= 0.0)
    throw Error(ErrorCode::OutOfDomain, "initial function evaluated outside [-H, 0)");
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), s + tol,
                             [](double v, const Piece& p) { return v < p.start; });
  const Piece& p = (it == pieces_.begin()) ? pieces_.front() : *std::prev(it);
  if (p.slope.size() == 0) return p.value;
  return p.value + (s - p.start) * p.slope;
}

// ---------------------------------------------------------------------------

const char* to_string(StabilityMethod m) noexcept {
  switch (m) {
    case StabilityMethod::SingleDelaySpectral: return "single_delay_spectral";
    case StabilityMethod::CommensurateCompanion: return "commensurate_companion";
    case StabilityMethod::TorusGridHeuristic: return "torus_grid_heuristic";
  }
  return "unknown";
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

Matrix companion_matrix(const std::vector<Matrix>& coeffs) {
  const auto m = static_cast<Index>(coeffs.size());
  const Index n = coeffs.front().rows();
  Matrix c = Matrix::Zero(n * m, n * m);
  for (Index j = 0; j < m; ++j) c.block(0, j * n, n, n) = coeffs[static_cast<std::size_t>(j)];
  if (m > 1) c.block(n, 0, n * (m - 1), n * (m - 1)).setIdentity();
  return c;
}

namespace {

struct StepRecursion {
  Rational h;
  std::vector<int> indices;  // delay of entry j is indices[j] * h
};

StepRecursion step_recursion(const DelaySystem& sys) {
  StepRecursion out;
  try {
    out.h = *sys.terms().front().delay.rational();
    for (const auto& t : sys.terms()) out.h = gcd(out.h, *t.delay.rational());
    for (const auto& t : sys.terms()) {
      const Rational q = *t.delay.rational() / out.h;
      if (!q.is_integer() || q.num() > 1'000'000)
        throw Error(ErrorCode::SizeExceeded, "commensurate index H/h exceeds 1e6");
      out.indices.push_back(static_cast<int>(q.num()));
    }
  } catch (const std::overflow_error& e) {
    throw Error(ErrorCode::SizeExceeded, e.what());
  }
  return out;
}

double spectral_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Verdict classify(double rho, double margin) {
  if (rho < 1.0 - margin) return Verdict::Stable;
  if (rho > 1.0 + margin) return Verdict::Unstable;
  return Verdict::Inconclusive;
}

// Fits gamma on the per-step values K_k of K on [k h, (k+1) h) using the
// recursion K_k = sum_j K_{k - i_j} A_j, K_{<0} = K0.
std::optional<DecayEstimate> fit_decay(const DelaySystem& sys, const std::vector<int>& indices, double step,
                                       double rho, double slack) {
  const Index n = sys.dim();
  Eigen::FullPivLU<Matrix> lu(sys.coeff_sum() - Matrix::Identity(n, n));
  if (!lu.isInvertible()) return std::nullopt;
  const Matrix k0 = lu.inverse();
  const double k0_norm = spectral_norm(k0);
  const double rho_eff = rho + slack * (1.0 - rho);
  const double sigma = -std::log(rho_eff) / step;

  const auto steps = static_cast<std::size_t>(
      std::clamp(std::ceil(std::log(1e-14) / std::log(rho_eff)), 8.0, 2.0e5));
  std::vector<Matrix> values;
  values.reserve(steps);
  double gamma = 1.0;
  double scale = rho_eff;
  for (std::size_t k = 0; k < steps; ++k) {
    Matrix v = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const auto back = static_cast<std::ptrdiff_t>(k) - indices[j];
      v += (back < 0 ? k0 : values[static_cast<std::size_t>(back)]) * sys.term(j).coeff;
    }
    gamma = std::max(gamma, spectral_norm(v) / (k0_norm * scale));
    values.push_back(std::move(v));
    scale *= rho_eff;
  }
  return DecayEstimate{gamma, sigma, step};
}

}  // namespace

StabilityReport stability_check(const DelaySystem& sys, const StabilityOptions& opts) {
  StabilityReport rep{};
  if (sys.size() == 1) {
    rep.method = StabilityMethod::SingleDelaySpectral;
    rep.spectral_radius = spectral_radius(sys.term(0).coeff);
    rep.verdict = classify(rep.spectral_radius, opts.spectral_margin);
    if (rep.stable()) rep.decay = fit_decay(sys, {1}, sys.max_delay(), rep.spectral_radius, opts.decay_slack);
    return rep;
  }
  if (sys.all_rational()) {
    const StepRecursion rec = step_recursion(sys);
    std::vector<Matrix> coeffs(static_cast<std::size_t>(rec.indices.back()),
                               Matrix::Zero(sys.dim(), sys.dim()));
    for (std::size_t j = 0; j < rec.indices.size(); ++j)
      coeffs[static_cast<std::size_t>(rec.indices[j] - 1)] = sys.term(j).coeff;
    rep.method = StabilityMethod::CommensurateCompanion;
    rep.spectral_radius = spectral_radius(companion_matrix(coeffs));
    rep.verdict = classify(rep.spectral_radius, opts.spectral_margin);
    if (rep.stable())
      rep.decay = fit_decay(sys, rec.indices, rec.h.to_double(), rep.spectral_radius, opts.decay_slack);
    return rep;
  }

  // max over a uniform grid of the torus of rho(sum_j A_j e^{i theta_j})
  const std::size_t dims = sys.size();
  std::size_t per_dim = std::max<std::size_t>(opts.torus_points, 1);
  while (per_dim > 4 && std::pow(static_cast<double>(per_dim), static_cast<double>(dims)) >
                            static_cast<double>(opts.torus_total_cap))
    --per_dim;
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) total *= per_dim;

  using CMatrix = Eigen::MatrixXcd;
  const Index n = sys.dim();
  double rho_max = 0.0;
  std::vector<std::size_t> idx(dims, 0);
  for (std::size_t point = 0; point < total; ++point) {
    std::size_t rest = point;
    for (std::size_t d = 0; d < dims; ++d) {
      idx[d] = rest % per_dim;
      rest /= per_dim;
    }
    CMatrix s = CMatrix::Zero(n, n);
    for (std::size_t d = 0; d < dims; ++d) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(idx[d]) / static_cast<double>(per_dim);
      s += sys.term(d).coeff.cast<std::complex<double>>() * std::polar(1.0, theta);
    }
    Eigen::ComplexEigenSolver<CMatrix> es(s, false);
    rho_max = std::max(rho_max, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  rep.method = StabilityMethod::TorusGridHeuristic;
  rep.spectral_radius = rho_max;
  rep.verdict = classify(rho_max, opts.torus_margin);
  rep.grid_points = total;
  return rep;
}

// ---------------------------------------------------------------------------

CommensurateForm to_commensurate(const ValidatedSystem& sys, const std::vector<Rational>& rational_delays) {
  if (rational_delays.empty() || rational_delays.size() != sys.size())
    throw Error(ErrorCode::NonRationalInput, "need exactly one rational delay per entry");
  std::vector<DelayTerm> terms;
  terms.reserve(sys.size());
  for (std::size_t j = 0; j < sys.size(); ++j)
    terms.push_back(DelayTerm{Delay::exact(rational_delays[j]), sys.terms()[j].coeff});
  DelaySystem rational_sys(std::move(terms));
  const StepRecursion rec = step_recursion(rational_sys);

  const Index n = sys.dim();
  std::vector<Matrix> coeffs(static_cast<std::size_t>(rec.indices.back()), Matrix::Zero(n, n));
  for (std::size_t j = 0; j < rec.indices.size(); ++j)
    coeffs[static_cast<std::size_t>(rec.indices[j] - 1)] = rational_sys.term(j).coeff;
  return CommensurateForm{rec.h,
                          rec.indices.back(),
                          std::move(coeffs),
                          rational_delays,
                          rec.indices,
                          validate(rational_sys),
                          sys.system()};
}

CommensurateForm to_commensurate(const ValidatedSystem& sys) {
  std::vector<Rational> delays;
  for (const auto& t : sys.terms()) {
    if (!t.delay.is_rational())
      throw Error(ErrorCode::NonRationalInput, "delay " + std::to_string(t.delay.value()) +
                                                   " is not exact; rationalize it first");
    delays.push_back(*t.delay.rational());
  }
  return to_commensurate(sys, delays);
}

}  // namespace ddlyap
