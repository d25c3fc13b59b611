#include "ddlyap/fundamental.hpp"

#include "lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace ddlyap {

namespace detail {

std::optional<TickDelays> tick_delays(const DelaySystem& sys) {
  if (!sys.all_rational()) return std::nullopt;
  try {
    std::int64_t scale = 1;
    for (const auto& t : sys.terms()) scale = lcm(scale, t.delay.rational()->den());
    TickDelays out{scale, {}};
    for (const auto& t : sys.terms()) {
      const Rational q = *t.delay.rational() * Rational(scale);
      out.ticks.push_back(q.num());
    }
    return out;
  } catch (const std::overflow_error&) {
    return std::nullopt;
  }
}

double lattice_tolerance(const DelaySystem& sys) {
  double tol = sys.merge_tolerance();
  if (auto ticks = tick_delays(sys)) tol = std::min(tol, 0.1 / static_cast<double>(ticks->scale));
  return tol;
}

}  // namespace detail

std::vector<double> discontinuity_instants(const DelaySystem& sys, double horizon, const LatticeOptions& opts) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  std::vector<double> out;
  const auto overflow = [&] {
    throw Error(ErrorCode::HorizonTooLarge, "lattice exceeds " + std::to_string(opts.max_points) + " points");
  };

  if (auto ticks = detail::tick_delays(sys)) {
    const double limit_d = std::floor(horizon * static_cast<double>(ticks->scale) + 1e-6);
    if (limit_d > 4e18) overflow();
    const auto limit = static_cast<std::int64_t>(limit_d);
    std::priority_queue<std::int64_t, std::vector<std::int64_t>, std::greater<>> frontier;
    frontier.push(0);
    std::int64_t last = -1;
    while (!frontier.empty()) {
      const std::int64_t t = frontier.top();
      frontier.pop();
      if (t == last) continue;
      last = t;
      out.push_back(static_cast<double>(t) / static_cast<double>(ticks->scale));
      if (out.size() > opts.max_points) overflow();
      for (std::int64_t d : ticks->ticks)
        if (t + d <= limit) frontier.push(t + d);
    }
    return out;
  }

  const double tol = sys.merge_tolerance();
  const std::vector<double> delays = sys.delays();
  std::priority_queue<double, std::vector<double>, std::greater<>> frontier;
  frontier.push(0.0);
  double last = -std::numeric_limits<double>::infinity();
  while (!frontier.empty()) {
    const double t = frontier.top();
    frontier.pop();
    if (t - last <= tol) continue;
    last = t;
    out.push_back(t);
    if (out.size() > opts.max_points) overflow();
    for (double d : delays)
      if (t + d <= horizon + tol) frontier.push(t + d);
  }
  return out;
}

// ---------------------------------------------------------------------------

StepMatrixFunction::StepMatrixFunction(Matrix pre_value, std::vector<double> breakpoints, std::vector<Matrix> values,
                                       double horizon, double tol)
    : pre_(std::move(pre_value)),
      breaks_(std::move(breakpoints)),
      values_(std::move(values)),
      horizon_(horizon),
      tol_(tol) {
  if (breaks_.size() != values_.size()) throw Error(ErrorCode::DimensionMismatch, "breakpoints/values mismatch");
}

const Matrix& StepMatrixFunction::operator()(double t) const {
  if (t > horizon_ + tol_) throw Error(ErrorCode::OutOfDomain, "K(t) requested beyond computed horizon");
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t + tol_);
  if (it == breaks_.begin()) return pre_;
  return values_[static_cast<std::size_t>(std::distance(breaks_.begin(), it) - 1)];
}

const Matrix& StepMatrixFunction::left_limit(double t) const {
  if (t > horizon_ + tol_) throw Error(ErrorCode::OutOfDomain, "K(t) requested beyond computed horizon");
  const auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t - tol_);
  if (it == breaks_.begin()) return pre_;
  return values_[static_cast<std::size_t>(std::distance(breaks_.begin(), it) - 1)];
}

JumpTable::JumpTable(Index n, std::vector<double> instants, std::vector<Matrix> jumps, double horizon, double tol)
    : n_(n), instants_(std::move(instants)), jumps_(std::move(jumps)), horizon_(horizon), tol_(tol) {
  if (instants_.size() != jumps_.size()) throw Error(ErrorCode::DimensionMismatch, "instants/jumps mismatch");
}

const Matrix* JumpTable::find(double t) const {
  const auto it = std::lower_bound(instants_.begin(), instants_.end(), t - tol_);
  if (it == instants_.end() || *it > t + tol_) return nullptr;
  return &jumps_[static_cast<std::size_t>(std::distance(instants_.begin(), it))];
}

Matrix JumpTable::at(double t) const {
  if (const Matrix* j = find(t)) return *j;
  return Matrix::Zero(n_, n_);
}

// ---------------------------------------------------------------------------

StepMatrixFunction fundamental_matrix(const ValidatedSystem& sys, double horizon, Side side,
                                      const LatticeOptions& opts) {
  const std::vector<double> instants = discontinuity_instants(sys.system(), horizon, opts);
  const double tol = detail::lattice_tolerance(sys.system());
  const Matrix& k0 = sys.k0();
  const Index n = sys.dim();

  std::vector<Matrix> values;
  values.reserve(instants.size());
  for (std::size_t k = 0; k < instants.size(); ++k) {
    Matrix v = Matrix::Zero(n, n);
    for (const auto& term : sys.terms()) {
      const double s = instants[k] - term.delay.value();
      // s < t_k, so only already computed intervals are consulted.
      const auto it = std::upper_bound(instants.begin(), instants.begin() + static_cast<std::ptrdiff_t>(k), s + tol);
      const Matrix& back =
          (it == instants.begin()) ? k0 : values[static_cast<std::size_t>(std::distance(instants.begin(), it) - 1)];
      if (side == Side::Right)
        v.noalias() += back * term.coeff;
      else
        v.noalias() += term.coeff * back;
    }
    values.push_back(std::move(v));
  }
  return StepMatrixFunction(k0, instants, std::move(values), horizon, tol);
}

JumpTable delta_k(const ValidatedSystem& sys, double horizon, const JumpOptions& opts) {
  const std::vector<double> instants = discontinuity_instants(sys.system(), horizon, opts.lattice);
  const double tol = detail::lattice_tolerance(sys.system());
  const Index n = sys.dim();

  std::vector<Matrix> jumps;
  jumps.reserve(instants.size());
  for (std::size_t k = 0; k < instants.size(); ++k) {
    if (k == 0) {
      jumps.push_back(Matrix::Identity(n, n));
      continue;
    }
    Matrix v = Matrix::Zero(n, n);
    for (const auto& term : sys.terms()) {
      const double s = instants[k] - term.delay.value();
      const auto end = instants.begin() + static_cast<std::ptrdiff_t>(k);
      const auto it = std::lower_bound(instants.begin(), end, s - tol);
      if (it != end && *it <= s + tol)
        v.noalias() += jumps[static_cast<std::size_t>(std::distance(instants.begin(), it))] * term.coeff;
    }
    jumps.push_back(std::move(v));
  }

  std::vector<double> kept_t;
  std::vector<Matrix> kept_j;
  for (std::size_t k = 0; k < instants.size(); ++k) {
    if (max_abs(jumps[k]) > opts.drop_tolerance || (opts.drop_tolerance <= 0.0 && max_abs(jumps[k]) > 0.0)) {
      kept_t.push_back(instants[k]);
      kept_j.push_back(std::move(jumps[k]));
    }
  }
  return JumpTable(n, std::move(kept_t), std::move(kept_j), horizon, tol);
}

// ---------------------------------------------------------------------------

namespace {

void check_grid(const std::vector<double>& grid) {
  for (double t : grid)
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "grid times must be finite and >= 0");
}

}  // namespace

Trajectory simulate(const ValidatedSystem& sys, const InitialFunction& phi, const std::vector<double>& grid,
                    const SimulationOptions& opts) {
  check_grid(grid);
  if (phi.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "initial function dimension");
  const double tol = sys.system().merge_tolerance();
  const double key_unit = 1e-12 * sys.max_delay();
  std::unordered_map<long long, Vector> memo;

  auto key = [&](double t) { return std::llround(t / key_unit); };
  auto value = [&](double t) -> const Vector& { return memo.at(key(t)); };

  // Depth-first descent with an explicit stack; deep chains (small h, long
  // horizons) would overflow the call stack.
  struct Frame {
    double t;
    std::size_t depth;
  };
  std::vector<Frame> stack;
  auto resolve = [&](double t0) {
    stack.assign(1, Frame{t0, 0});
    while (!stack.empty()) {
      const Frame f = stack.back();
      if (memo.count(key(f.t))) {
        stack.pop_back();
        continue;
      }
      bool ready = true;
      for (const auto& term : sys.terms()) {
        const double s = f.t - term.delay.value();
        if (s < -tol || memo.count(key(s))) continue;
        if (f.depth + 1 > opts.max_depth) throw Error(ErrorCode::RecursionDepthExceeded, "recursion depth cap reached");
        stack.push_back(Frame{s, f.depth + 1});
        ready = false;
      }
      if (!ready) continue;
      Vector x = Vector::Zero(sys.dim());
      for (const auto& term : sys.terms()) {
        const double s = f.t - term.delay.value();
        if (s < -tol)
          x.noalias() += term.coeff * phi(s, tol);
        else
          x.noalias() += term.coeff * value(s);
      }
      memo.emplace(key(f.t), std::move(x));
      stack.pop_back();
    }
  };

  Trajectory out;
  out.reserve(grid.size());
  for (double t : grid) {
    resolve(t);
    out.push_back(value(t));
  }
  return out;
}

Trajectory simulate_cauchy(const ValidatedSystem& sys, const InitialFunction& phi, const std::vector<double>& grid,
                           const SimulationOptions& /*opts*/) {
  check_grid(grid);
  if (phi.dim() != sys.dim()) throw Error(ErrorCode::DimensionMismatch, "initial function dimension");
  const double t_max = grid.empty() ? 0.0 : *std::max_element(grid.begin(), grid.end());
  const JumpTable table = delta_k(sys, t_max + sys.max_delay());
  const double tol = sys.system().merge_tolerance();
  const auto& inst = table.instants();

  Trajectory out;
  out.reserve(grid.size());
  for (double t : grid) {
    Vector x = Vector::Zero(sys.dim());
    for (const auto& term : sys.terms()) {
      const double h = term.delay.value();
      // theta = t - h - t_k in [-h, 0)  <=>  t_k in (t - h, t]
      auto first = std::upper_bound(inst.begin(), inst.end(), t - h + tol);
      auto last = std::upper_bound(inst.begin(), inst.end(), t + tol);
      for (auto it = first; it != last; ++it) {
        const double theta = t - h - *it;
        const auto k = static_cast<std::size_t>(std::distance(inst.begin(), it));
        x.noalias() += table.jumps()[k] * (term.coeff * phi(theta, tol));
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace ddlyap
