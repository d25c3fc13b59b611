#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace ddlyap {

/// Reduced fraction num/den with den > 0. Arithmetic is exact; results that do
/// not fit in 64 bits throw std::overflow_error.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  bool is_integer() const noexcept { return den_ == 1; }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) noexcept = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Largest rational g such that a/g and b/g are both integers (a, b > 0).
Rational gcd(const Rational& a, const Rational& b);

std::int64_t lcm(std::int64_t a, std::int64_t b);

}  // namespace ddlyap
