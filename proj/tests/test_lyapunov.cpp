#include "doctest.h"
#include "fixtures.hpp"

#include <chrono>
#include <cmath>

using namespace ddlyap;
using namespace fixtures;

namespace {

// U(tau) for x(t) = a x(t - h), w = 1, straight from the defining integral:
// K = K0 a^(k+1) on [k h, (k+1) h), so each cell contributes two constant pieces.
double scalar_u(double a, double h, double tau) {
  const double k0 = 1.0 / (a - 1.0);
  auto kval = [&](int cell) { return k0 * std::pow(a, cell + 1); };
  const double x = tau / h;
  const int shift = static_cast<int>(std::floor(x));
  const double frac = x - shift;
  double sum = 0.0;
  for (int k = 0; k < 4000; ++k) {
    const double left = (kval(k) - k0);
    sum += left * ((1.0 - frac) * kval(k + shift) + frac * kval(k + shift + 1)) * h;
  }
  return sum;
}

}  // namespace

TEST_SUITE("lyapunov") {

TEST_CASE("scalar closed form") {
  const auto start = std::chrono::steady_clock::now();
  auto v = validate(scalar(0.5));
  auto u = build_single_delay(v, WeightMatrix::identity(1));
  CHECK(std::abs(u(0.0)(0, 0) + 8.0 / 3.0) <= 1e-10);
  CHECK(std::abs(u(0.5)(0, 0) + 2.0) <= 1e-10);
  CHECK(std::abs(u(1.0)(0, 0) + 4.0 / 3.0) <= 1e-10);
  CHECK(std::abs(u(-1.0)(0, 0) + 16.0 / 3.0) <= 1e-10);
  CHECK(u.slope(0)(0, 0) == doctest::Approx(4.0 / 3.0));
  CHECK(u.slope(-1)(0, 0) == doctest::Approx(8.0 / 3.0));
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 1.0);
}

TEST_CASE("scalar systems match the geometric series") {
  for (double a : {0.5, -0.6, 0.9, -0.2}) {
    for (Rational h : {Rational(1), Rational(1, 2), Rational(7, 3)}) {
      auto v = validate(scalar(a, h));
      auto u = build_single_delay(v, WeightMatrix::identity(1));
      const double big_h = h.to_double();
      for (int i = 0; i <= 20; ++i) {
        const double tau = -big_h + 2 * big_h * i / 20.0;
        CHECK(u(tau)(0, 0) == doctest::Approx(scalar_u(a, big_h, tau)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("property residuals on the worked systems") {
  auto w = WeightMatrix::identity(2);
  for (auto sys : {unstable_single(), twin_stable(), twin_unstable(), twin_stable(0.5)}) {
    auto v = validate(sys);
    auto u = build_lyapunov(v, w);
    auto r = residuals(u, v, w);
    CHECK(r.symmetry <= 1e-8);
    CHECK(r.dynamic <= 1e-8);
    CHECK(r.continuity <= 1e-8);
    CHECK(r.grid_points > 0);
  }
}

TEST_CASE("non-identity weight") {
  WeightMatrix w(mat2(2.0, 0.3, 0.3, 0.5));
  auto v = validate(twin_stable());
  auto u = build_lyapunov(v, w);
  CHECK(residuals(u, v, w).worst() <= 1e-8);
  // U is linear in W
  auto u1 = build_lyapunov(v, WeightMatrix(mat2(1.5, 0.0, 0.0, 0.2)));
  auto u2 = build_lyapunov(v, WeightMatrix(mat2(0.5, 0.3, 0.3, 0.3)));
  auto sum = u1 + u2;
  for (double tau : {-1.5, -0.2, 0.0, 0.9, 1.5}) CHECK(max_abs(sum(tau) - u(tau)) < 1e-12);
}

TEST_CASE("one-step commensurate build equals the single-delay build") {
  auto v = validate(unstable_single());
  auto w = WeightMatrix::identity(2);
  auto a = build_single_delay(v, w);
  auto cf = to_commensurate(v, {Rational(1)});
  auto b = build_commensurate(cf, w);
  for (int i = 0; i <= 40; ++i) {
    const double tau = -1.0 + i / 20.0;
    CHECK(max_abs(a(tau) - b(tau)) < 1e-12);
  }
}

TEST_CASE("sparse and dense solves agree") {
  auto cf = to_commensurate(validate(twin_stable()));
  auto w = WeightMatrix::identity(2);
  auto dense = build_commensurate(cf, w);
  BuildOptions opts;
  opts.dense_limit = 0;
  auto sparse = build_commensurate(cf, w, opts);
  CHECK_FALSE(dense.sparse_solve);
  CHECK(sparse.sparse_solve);
  CHECK(sparse.unknowns == 2 * 3 * 4);
  for (int k = -3; k < 3; ++k) {
    CHECK(max_abs(dense.offset(k) - sparse.offset(k)) < 1e-12);
    CHECK(max_abs(dense.slope(k) - sparse.slope(k)) < 1e-12);
  }
  CHECK(sparse.condition_estimate == doctest::Approx(dense.condition_estimate).epsilon(0.5));
}

TEST_CASE("size cap") {
  auto cf = to_commensurate(validate(twin_stable()));
  BuildOptions opts;
  opts.max_unknowns = 10;
  CHECK_THROWS_AS(build_commensurate(cf, WeightMatrix::identity(2), opts), Error);
  opts = BuildOptions{};
  opts.dense_limit = 0;
  opts.sparse_enabled = false;
  CHECK_THROWS_AS(build_commensurate(cf, WeightMatrix::identity(2), opts), Error);
}

TEST_CASE("critical system") {
  // eigenvalues 2 and 0.5 multiply to 1
  auto v = validate(DelaySystem({DelayTerm{Delay::exact(Rational(1)), mat2(2.0, 0.0, 0.0, 0.5)}}));
  try {
    build_single_delay(v, WeightMatrix::identity(2));
    FAIL("expected CriticalSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CriticalSystem);
  }
  BuildOptions sparse;
  sparse.dense_limit = 0;
  CHECK_THROWS_AS(build_single_delay(v, WeightMatrix::identity(2), sparse), Error);
  // nearly critical builds but carries a large condition estimate
  auto near = validate(DelaySystem({DelayTerm{Delay::exact(Rational(1)), mat2(2.0, 0.0, 0.0, 0.5 + 1e-6)}}));
  auto u = build_single_delay(near, WeightMatrix::identity(2));
  CHECK(u.condition_estimate > 1e5);
}

TEST_CASE("domain") {
  auto u = build_single_delay(validate(scalar(0.5)), WeightMatrix::identity(1));
  CHECK_THROWS_AS(evaluate(u, 1.01), Error);
  CHECK_THROWS_AS(evaluate(u, -1.01), Error);
  CHECK_NOTHROW(evaluate(u, 1.0));
  CHECK_NOTHROW(evaluate(u, -1.0));
}

TEST_CASE("weight and system dimensions must agree") {
  CHECK_THROWS_AS(build_lyapunov(validate(unstable_single()), WeightMatrix::identity(3)), Error);
  CHECK_THROWS_AS(build_lyapunov(validate(sqrt2_pair()), WeightMatrix::identity(2)), Error);
}

TEST_CASE("P matrix") {
  auto w = WeightMatrix::identity(2);
  for (auto sys : {unstable_single(), twin_stable(), twin_unstable(), sqrt2_pair()}) {
    auto p = p_matrix(validate(sys), w);
    CHECK(max_abs(p + p.transpose()) <= 1e-12);
  }
  CHECK(max_abs(p_matrix(validate(scalar(0.5)), WeightMatrix::identity(1))) == 0.0);
}

TEST_CASE("symmetry at zero fixes the antisymmetric part of U(0)") {
  auto v = validate(twin_stable());
  auto w = WeightMatrix::identity(2);
  auto u = build_lyapunov(v, w);
  Matrix u0 = u(0.0);
  CHECK(max_abs(u0 - u0.transpose() - p_matrix(v, w)) < 1e-12);
}

TEST_CASE("plot grid contains every knot") {
  auto u = build_lyapunov(validate(twin_stable()), WeightMatrix::identity(2));
  auto g = plot_grid(u, 200);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(g.front() == -1.5);
  CHECK(g.back() == 1.5);
  for (int k = -3; k <= 3; ++k) {
    const double knot = 0.5 * k;
    CHECK(std::any_of(g.begin(), g.end(), [&](double t) { return std::abs(t - knot) < 1e-14; }));
  }
  CHECK(g.size() >= 200);
}

}  // TEST_SUITE
