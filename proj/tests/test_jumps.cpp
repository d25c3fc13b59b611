#include "doctest.h"
#include "fixtures.hpp"

using namespace ddlyap;
using namespace fixtures;

TEST_SUITE("jumps") {

TEST_CASE("scalar jumps from the closed form") {
  auto v = validate(scalar(0.5));
  auto w = WeightMatrix::identity(1);
  JumpSeries js(v, w);
  // Delta U'(0) = -sum a^(2k) = -4/3, Delta U'(1) = -sum a^(2k+1) = -2/3
  CHECK(js.delta_u_prime(0.0).value(0, 0) == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
  CHECK(js.delta_u_prime(1.0).value(0, 0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(js.delta_u_prime(-1.0).value(0, 0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(js.delta_u_prime(0.4).value(0, 0) == 0.0);
  CHECK(js.delta_u_prime(0.0).bound <= 1e-9);

  auto u = build_single_delay(v, w);
  auto seg = jumps_from_segments(u);
  CHECK(seg.at(0.0, 1)(0, 0) == doctest::Approx(-4.0 / 3.0));
  CHECK(seg.horizon == 0.0);
  CHECK(seg.at(0.4, 1)(0, 0) == 0.0);
}

TEST_CASE("series derivative matches the segment slopes") {
  auto v = validate(twin_stable(0.5));
  auto w = WeightMatrix::identity(2);
  JumpSeries js(v, w);
  auto u = build_lyapunov(v, w);
  for (int k = -3; k < 3; ++k) {
    const double mid = 0.5 * k + 0.2;
    auto right = js.u_prime(mid, Side::Right);
    auto left = js.u_prime(mid, Side::Left);
    CHECK(max_abs(right.value - u.slope(k)) <= 10 * right.bound + 1e-12);
    CHECK(max_abs(left.value - u.slope(k)) <= 10 * left.bound + 1e-12);
  }
  // one-sided derivatives at the knot 0
  auto r0 = js.u_prime(0.0, Side::Right).value;
  auto l0 = js.u_prime(0.0, Side::Left).value;
  CHECK(max_abs(r0 - u.slope(0)) < 1e-10);
  CHECK(max_abs(l0 - u.slope(-1)) < 1e-10);
  CHECK(max_abs((r0 - l0) - js.delta_u_prime(0.0).value) < 1e-10);
}

TEST_CASE("jump properties on stable systems") {
  auto w = WeightMatrix::identity(2);
  for (auto sys : {twin_stable(0.5), twin_stable()}) {
    auto v = validate(sys);
    JumpSeries js(v, w);
    auto grid = knot_grid(v);
    for (double t : {-1.3, -0.35, 0.35, 1.1}) grid.push_back(t);
    auto rep = check_jump_properties(js, grid);
    CHECK(rep.bound <= 1e-9);
    CHECK(rep.passed());
    CHECK(rep.psd_margin >= -1e-10);
    CHECK(rep.points == grid.size());

    auto u = build_lyapunov(v, w);
    auto seg = jumps_from_segments(u);
    for (double tau : knot_grid(v)) {
      if (std::abs(tau) >= v.max_delay() - 1e-12) continue;
      auto s = js.delta_u_prime(tau);
      CHECK(max_abs(seg.at(tau, 2) - s.value) <= std::max(s.bound, 1e-12));
    }
  }
}

TEST_CASE("incommensurate stable system") {
  auto sys = DelaySystem({DelayTerm{Delay::real(1.0), mat2(0.2, 0.1, 0.0, -0.3)},
                          DelayTerm{Delay::real(std::sqrt(2.0)), mat2(0.1, 0.0, 0.2, 0.2)}});
  auto v = validate(sys);
  auto rep = stability_check(v);
  // torus heuristic: stable verdict but no decay constants
  CHECK(rep.verdict == Verdict::Stable);
  CHECK_THROWS_AS(JumpSeries(v, WeightMatrix::identity(2)), Error);
}

TEST_CASE("unstable systems are refused") {
  try {
    JumpSeries js(validate(twin_unstable()), WeightMatrix::identity(2));
    FAIL("expected NotStable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotStable);
  }
}

TEST_CASE("series domain") {
  JumpSeries js(validate(scalar(0.5)), WeightMatrix::identity(1));
  CHECK_THROWS_AS(js.delta_u_prime(2.5), Error);
}

TEST_CASE("segment jumps of an unstable build") {
  auto u = build_lyapunov(validate(twin_unstable()), WeightMatrix::identity(2));
  auto seg = jumps_from_segments(u);
  CHECK(!seg.entries.empty());
  for (const auto& [tau, d] : seg.entries) {
    CHECK(std::abs(tau) < 1.5);
    CHECK(d.allFinite());
  }
}

TEST_CASE("spectrum from the series") {
  JumpSeries js(validate(scalar(0.5)), WeightMatrix::identity(1));
  auto sp = series_spectrum(js, {1.0, -0.5, 0.0, 0.5, -1.0});
  REQUIRE(sp.entries.size() == 5);
  CHECK(sp.entries.front().first == -1.0);
  CHECK(sp.at(0.5, 1)(0, 0) == 0.0);
  CHECK(sp.at(0.0, 1)(0, 0) == doctest::Approx(-4.0 / 3.0));
  CHECK(sp.horizon == js.horizon());
}

}  // TEST_SUITE
