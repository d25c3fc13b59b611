#include "ddlyap/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlyap {

ContinuedFraction continued_fraction(double x, int s_max) {
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "continued fraction of a non-finite value");
  if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "continued fraction needs x > 0");
  if (s_max < 0 || s_max > 64) throw Error(ErrorCode::InvalidArgument, "s_max must lie in [0, 64]");

  // x is a dyadic rational; run Euclid exactly on num / 2^k.
  int e = 0;
  const double mant = std::frexp(x, &e);  // x = mant * 2^e, mant in [0.5, 1)
  if (e > 62 || e < -60) throw Error(ErrorCode::InvalidArgument, "continued fraction input out of range");
  __int128 num = static_cast<__int128>(std::ldexp(mant, 53));
  __int128 den = static_cast<__int128>(1) << 53;
  if (e >= 0)
    num <<= e;
  else
    den <<= -e;
  while ((num & 1) == 0 && (den & 1) == 0) {
    num >>= 1;
    den >>= 1;
  }

  ContinuedFraction cf;
  cf.source = x;
  long double p_prev = 0, p = 1, q_prev = 1, q = 0;  // p_{-2}, p_{-1}, q_{-2}, q_{-1}
  for (int i = 0; i <= s_max; ++i) {
    const __int128 a = num / den;
    const __int128 r = num - a * den;
    if (a > static_cast<__int128>(std::numeric_limits<std::int64_t>::max())) break;
    cf.terms.push_back(static_cast<std::int64_t>(a));
    const long double p_next = static_cast<long double>(a) * p + p_prev;
    const long double q_next = static_cast<long double>(a) * q + q_prev;
    p_prev = p;
    p = p_next;
    q_prev = q;
    q = q_next;
    // stop once the convergent reproduces x (same rounding as Rational::to_double)
    if (r == 0 || static_cast<double>(p) / static_cast<double>(q) == x) {
      cf.terminated = true;
      break;
    }
    num = den;
    den = r;
  }
  return cf;
}

Rational convergent(const ContinuedFraction& cf, int s) {
  if (s < 0) throw Error(ErrorCode::OrderUnavailable, "negative order");
  const auto available = static_cast<int>(cf.terms.size()) - 1;
  if (s > available) {
    if (!cf.terminated)
      throw Error(ErrorCode::OrderUnavailable,
                  "order " + std::to_string(s) + " beyond " + std::to_string(available) + " available terms");
    s = available;
  }
  __int128 p_prev = 1, p = cf.terms[0], q_prev = 0, q = 1;
  constexpr __int128 limit = std::numeric_limits<std::int64_t>::max();
  for (int i = 1; i <= s; ++i) {
    const __int128 a = cf.terms[static_cast<std::size_t>(i)];
    const __int128 p_next = a * p + p_prev;
    const __int128 q_next = a * q + q_prev;
    if (p_next > limit || q_next > limit)
      throw Error(ErrorCode::OrderUnavailable, "convergent of order " + std::to_string(s) + " overflows 64 bits");
    p_prev = p;
    p = p_next;
    q_prev = q;
    q = q_next;
  }
  return Rational(static_cast<std::int64_t>(p), static_cast<std::int64_t>(q));
}

CommensurateForm approximate_system(const ValidatedSystem& sys, int s, const ApproximationOptions& opts) {
  std::vector<Rational> delays;
  for (const auto& t : sys.terms()) {
    if (t.delay.is_rational())
      delays.push_back(*t.delay.rational());
    else
      delays.push_back(convergent(continued_fraction(t.delay.value()), s));
  }
  for (std::size_t j = 1; j < delays.size(); ++j)
    if (!(delays[j - 1] < delays[j]))
      throw Error(ErrorCode::OrderUnavailable,
                  "order " + std::to_string(s) + " maps two delays onto " + delays[j].str());
  Rational h = delays.front();
  try {
    for (const auto& d : delays) h = gcd(h, d);
    const Rational m = delays.back() / h;
    if (m.num() > opts.max_m)
      throw Error(ErrorCode::SizeExceeded, "m = " + m.str() + " exceeds " + std::to_string(opts.max_m));
  } catch (const std::overflow_error& e) {
    throw Error(ErrorCode::SizeExceeded, e.what());
  }
  return to_commensurate(sys, delays);
}

double sup_difference(const PiecewiseAffineMatrixFunction& a, const PiecewiseAffineMatrixFunction& b,
                      std::size_t points) {
  const double big_h = std::min(a.max_delay(), b.max_delay());
  points = std::max<std::size_t>(points, 2);
  double best = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double tau = -big_h + 2.0 * big_h * static_cast<double>(i) / static_cast<double>(points - 1);
    best = std::max(best, max_abs(a(tau) - b(tau)));
  }
  return best;
}

SequenceResult u_sequence(const ValidatedSystem& sys, const WeightMatrix& w, const std::vector<int>& orders,
                          const SequenceOptions& opts) {
  SequenceResult out;
  for (int s : orders) {
    CommensurateForm cf = approximate_system(sys, s, opts.approx);
    PiecewiseAffineMatrixFunction u = build_commensurate(cf, w, opts.build);
    ResidualReport res = residuals(u, cf.system, w, opts.residual_density);
    StabilityReport stab{};
    if (opts.with_stability) stab = stability_check(cf.system);
    std::optional<double> diff;
    if (!out.steps.empty()) {
      diff = sup_difference(out.steps.back().u, u, opts.grid_points);
      if (opts.with_stability && out.steps.back().stability.verdict != stab.verdict) out.stability_disagreement = true;
    }
    out.steps.push_back(ApproximationStep{s, cf.delays, cf.basic_delay, cf.m, std::move(u), res, stab, diff});
  }
  return out;
}

}  // namespace ddlyap
