#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>

using namespace ddlyap;
using namespace fixtures;

namespace {

std::vector<InitialFunction> test_phis(double big_h) {
  std::vector<InitialFunction> out;
  out.push_back(InitialFunction::constant((Vector(2) << 1.0, -1.0).finished(), big_h));
  out.push_back(InitialFunction::piecewise({{-big_h, (Vector(2) << 1.0, 0.0).finished(), {}},
                                            {-big_h / 3, (Vector(2) << -0.5, 2.0).finished(), {}}},
                                           big_h));
  out.push_back(InitialFunction::piecewise({{-big_h, (Vector(2) << 0.0, 3.0).finished(), {}},
                                            {-0.71 * big_h, (Vector(2) << 2.0, 1.0).finished(), {}},
                                            {-0.4 * big_h, (Vector(2) << -1.0, -2.0).finished(), {}},
                                            {-0.05 * big_h, (Vector(2) << 0.25, 0.5).finished(), {}}},
                                           big_h));
  return out;
}

double max_rel(const Trajectory& a, const Trajectory& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    e = std::max(e, (a[i] - b[i]).cwiseAbs().maxCoeff() / (1.0 + a[i].cwiseAbs().maxCoeff()));
  return e;
}

}  // namespace

TEST_SUITE("fundamental") {

TEST_CASE("lattice of exact delays") {
  auto pts = discontinuity_instants(twin_stable(), 3.0);
  std::vector<double> want{0.0, 1.0, 1.5, 2.0, 2.5, 3.0};
  REQUIRE(pts.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(pts[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("lattice of incommensurate delays") {
  auto pts = discontinuity_instants(sqrt2_pair(), 3.0);
  // p + q sqrt2 <= 3
  std::vector<double> want;
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; q <= 2; ++q)
      if (p + q * std::sqrt(2.0) <= 3.0) want.push_back(p + q * std::sqrt(2.0));
  std::sort(want.begin(), want.end());
  REQUIRE(pts.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(pts[i] == doctest::Approx(want[i]));
}

TEST_CASE("near coincident float delays merge") {
  auto sys = DelaySystem({DelayTerm{Delay::real(1.0), scalar_mat(0.2)}, DelayTerm{Delay::real(2.0 + 1e-11), scalar_mat(0.1)}});
  auto pts = discontinuity_instants(sys, 4.5);
  CHECK(pts.size() == 5);  // 0 1 2 3 4
}

TEST_CASE("lattice size cap") {
  LatticeOptions opts;
  opts.max_points = 100;
  CHECK_THROWS_AS(discontinuity_instants(sqrt2_pair(), 200.0, opts), Error);
}

TEST_CASE("scalar fundamental matrix is geometric") {
  auto v = validate(scalar(0.5));
  auto k = fundamental_matrix(v, 5.0);
  CHECK(k(-0.5)(0, 0) == -2.0);
  CHECK(k(0.0)(0, 0) == -1.0);
  CHECK(k(0.99)(0, 0) == -1.0);
  CHECK(k(1.0)(0, 0) == -0.5);
  CHECK(k(2.5)(0, 0) == -0.25);
  CHECK(k.left_limit(1.0)(0, 0) == -1.0);
  CHECK_THROWS_AS(k(5.5), Error);
}

TEST_CASE("K(0) = I + K0") {
  for (auto sys : {unstable_single(), twin_stable(), twin_unstable(), sqrt2_pair()}) {
    auto v = validate(sys);
    auto k = fundamental_matrix(v, 2.0);
    CHECK(max_abs(k(0.0) - (Matrix::Identity(2, 2) + v.k0())) < 1e-13);
  }
}

TEST_CASE("right and left constructions agree") {
  for (auto sys : {unstable_single(), twin_stable(), twin_unstable(), twin_stable(0.5), sqrt2_pair()}) {
    auto v = validate(sys);
    const double big_h = v.max_delay();
    auto kr = fundamental_matrix(v, 10 * big_h, Side::Right);
    auto kl = fundamental_matrix(v, 10 * big_h, Side::Left);
    REQUIRE(kr.breakpoints().size() == kl.breakpoints().size());
    for (std::size_t i = 0; i < kr.values().size(); ++i) {
      const double scale = 1.0 + max_abs(kr.values()[i]);
      CHECK(max_abs(kr.values()[i] - kl.values()[i]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("left fundamental matrix solves the recursion") {
  for (auto sys : {twin_stable(), sqrt2_pair()}) {
    auto v = validate(sys);
    auto k = fundamental_matrix(v, 6.0, Side::Left);
    for (double t = 0.03; t < 6.0; t += 0.173) {
      Matrix rhs = Matrix::Zero(2, 2);
      for (const auto& term : v.terms()) rhs += term.coeff * k(t - term.delay.value());
      CHECK(max_abs(k(t) - rhs) <= 1e-12 * (1.0 + max_abs(k(t))));
    }
  }
}

TEST_CASE("jump table") {
  auto v = validate(twin_stable());
  auto dk = delta_k(v, 4.0);
  CHECK(max_abs(dk.at(0.0) - Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(dk.at(1.0) - twin_stable_a1()) < 1e-15);
  CHECK(max_abs(dk.at(1.5) - twin_stable_a2()) < 1e-15);
  CHECK(max_abs(dk.at(2.0) - twin_stable_a1() * twin_stable_a1()) < 1e-15);
  CHECK(dk.find(0.7) == nullptr);
  CHECK(max_abs(dk.at(0.7)) == 0.0);

  // jumps of K are differences of consecutive values
  auto k = fundamental_matrix(v, 4.0);
  for (double t : dk.instants()) CHECK(max_abs(k(t) - k.left_limit(t) - dk.at(t)) < 1e-14);
}

TEST_CASE("simulation routes agree") {
  for (auto sys : {unstable_single(), twin_stable(), twin_unstable(), sqrt2_pair()}) {
    auto v = validate(sys);
    const double big_h = v.max_delay();
    std::vector<double> grid;
    for (int i = 0; i < 200; ++i) grid.push_back(5 * big_h * (i + 0.5) / 200.0);
    for (const auto& phi : test_phis(big_h)) {
      auto a = simulate(v, phi, grid);
      auto b = simulate_cauchy(v, phi, grid);
      CHECK(max_rel(a, b) <= 1e-9);
    }
  }
}

TEST_CASE("simulation on lattice points") {
  auto v = validate(scalar(0.5));
  auto phi = InitialFunction::constant(Vector::Constant(1, 1.0), 1.0);
  auto x = simulate(v, phi, {0.0, 1.0, 2.0, 2.5});
  CHECK(x[0](0) == 0.5);
  CHECK(x[1](0) == 0.25);
  CHECK(x[3](0) == 0.125);
  auto y = simulate_cauchy(v, phi, {0.0, 1.0, 2.0, 2.5});
  for (int i = 0; i < 4; ++i) CHECK(y[i](0) == doctest::Approx(x[i](0)));
}

TEST_CASE("deep chains do not exhaust the stack") {
  auto v = validate(scalar(0.999, Rational(1, 1000)));
  auto phi = InitialFunction::constant(Vector::Constant(1, 1.0), 0.001);
  auto x = simulate(v, phi, {60.0});
  CHECK(x[0](0) == doctest::Approx(std::pow(0.999, 60001)).epsilon(1e-8));
}

TEST_CASE("recursion depth cap") {
  auto v = validate(scalar(0.5, Rational(1, 100)));
  SimulationOptions opts;
  opts.max_depth = 50;
  auto phi = InitialFunction::constant(Vector::Constant(1, 1.0), 0.01);
  CHECK_THROWS_AS(simulate(v, phi, {10.0}, opts), Error);
}

}  // TEST_SUITE
