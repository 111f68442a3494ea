#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace doob {

using Rational = boost::multiprecision::cpp_rational;

/// A number in [-inf, +inf) extended with a single +inf marker.
///
/// Finite values are either exact rationals or IEEE doubles. Arithmetic
/// between two exact operands stays exact; any inexact operand makes the
/// result inexact. Comparisons are always exact (a finite double is a
/// dyadic rational), so 1/2 compares equal to 0.5.
///
/// Infinity follows measure-theory conventions: inf + x = inf, inf * 0 = 0.
/// Operations that would need -inf or an undefined form throw
/// std::domain_error.
class ExtendedReal {
 public:
  enum class Kind : std::uint8_t { exact, inexact, infinite };

  ExtendedReal() = default;
  ExtendedReal(Rational q) : kind_(Kind::exact), exact_(std::move(q)) {}  // NOLINT
  ExtendedReal(int v) : ExtendedReal(Rational(v)) {}                      // NOLINT
  ExtendedReal(long long v) : ExtendedReal(Rational(v)) {}                // NOLINT
  ExtendedReal(double v);                                                 // NOLINT

  static ExtendedReal infinity();
  static ExtendedReal ratio(long long num, long long den);

  Kind kind() const { return kind_; }
  bool is_exact() const { return kind_ == Kind::exact; }
  bool is_infinite() const { return kind_ == Kind::infinite; }
  bool is_finite() const { return kind_ != Kind::infinite; }
  bool is_zero() const;
  int sign() const;

  /// Exact value; throws std::logic_error when the number is not exact.
  const Rational& exact() const;
  /// Exact rational equal to the finite value (doubles convert losslessly).
  Rational to_rational() const;
  double to_double() const;

  /// "p/q" (or "p") for exact values, shortest round-trip decimal for
  /// inexact ones, "inf" for infinity.
  std::string to_string() const;

  ExtendedReal operator-() const;
  ExtendedReal& operator+=(const ExtendedReal& rhs);
  ExtendedReal& operator-=(const ExtendedReal& rhs);
  ExtendedReal& operator*=(const ExtendedReal& rhs);
  ExtendedReal& operator/=(const ExtendedReal& rhs);

  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) { return a += b; }
  friend ExtendedReal operator-(ExtendedReal a, const ExtendedReal& b) { return a -= b; }
  friend ExtendedReal operator*(ExtendedReal a, const ExtendedReal& b) { return a *= b; }
  friend ExtendedReal operator/(ExtendedReal a, const ExtendedReal& b) { return a /= b; }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
  friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return !(a < b); }

 private:
  Kind kind_ = Kind::exact;
  Rational exact_{0};
  double inexact_ = 0.0;
};

std::ostream& operator<<(std::ostream& os, const ExtendedReal& x);

/// Parses "inf", integers, "p/q" rationals (exact) and decimal/scientific
/// literals (inexact). Throws std::invalid_argument on anything else.
ExtendedReal parse_extended_real(std::string_view text);

/// True when `text` has the exact-number shape: optional sign, digits,
/// optional "/digits".
bool looks_like_exact_number(std::string_view text);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

ExtendedReal abs(const ExtendedReal& x);
ExtendedReal square(const ExtendedReal& x);

}  // namespace doob
