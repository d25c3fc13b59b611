#pragma once

#include "ddlyap/ddlyap.hpp"
#include "ddlyap/io.hpp"

#include <random>

namespace fixtures {

using ddlyap::Delay;
using ddlyap::DelaySystem;
using ddlyap::DelayTerm;
using ddlyap::Matrix;
using ddlyap::Rational;

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Matrix scalar_mat(double a) { return Matrix::Constant(1, 1, a); }

inline DelaySystem scalar(double a, Rational h = Rational(1)) {
  return DelaySystem({DelayTerm{Delay::exact(h), scalar_mat(a)}});
}

inline Matrix unstable_single_a() { return mat2(-0.9375, 1.11844, 0.3732, -1.3009); }

inline DelaySystem unstable_single(double big_h = 1.0) {
  return DelaySystem({DelayTerm{Delay::real(big_h), unstable_single_a()}});
}

inline Matrix twin_stable_a1() { return mat2(-0.4, -0.3, 0.1, 0.15); }
inline Matrix twin_stable_a2() { return mat2(0.1, 0.25, -0.9, -0.1); }
inline Matrix twin_unstable_a1() { return mat2(1.1, 0.0, -0.4, 0.0); }
inline Matrix twin_unstable_a2() { return mat2(0.25, -0.125, -0.4, -0.5); }

inline DelaySystem two_delay(const Matrix& a1, const Matrix& a2) {
  return DelaySystem({DelayTerm{Delay::exact(Rational(1)), a1}, DelayTerm{Delay::exact(Rational(3, 2)), a2}});
}

inline DelaySystem twin_stable(double scale = 1.0) { return two_delay(scale * twin_stable_a1(), scale * twin_stable_a2()); }
inline DelaySystem twin_unstable() { return two_delay(twin_unstable_a1(), twin_unstable_a2()); }

inline DelaySystem sqrt2_pair(double a = 0.7, double b = -1.1) {
  return DelaySystem({DelayTerm{Delay::exact(Rational(1)), mat2(-0.4, -0.3, 0.1 + a, 0.15)},
                      DelayTerm{Delay::real(std::sqrt(2.0)), mat2(0.1, 0.25, -0.9, -0.1 + b)}});
}

/// Random 2x2 matrix rescaled to the requested spectral radius.
inline Matrix random_with_radius(std::mt19937& rng, double radius) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(2, 2);
  for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = dist(rng);
  Eigen::EigenSolver<Matrix> es(m, false);
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  return m * (radius / rho);
}

}  // namespace fixtures
