#include "doobdynkin/extended_real.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace doob {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

}  // namespace

ExtendedReal::ExtendedReal(double v) {
  if (std::isnan(v)) throw std::domain_error("NaN is not an extended real");
  if (std::isinf(v)) {
    if (v < 0) throw std::domain_error("-inf is not representable");
    kind_ = Kind::infinite;
    return;
  }
  kind_ = Kind::inexact;
  inexact_ = v;
}

ExtendedReal ExtendedReal::infinity() {
  ExtendedReal x;
  x.kind_ = Kind::infinite;
  return x;
}

ExtendedReal ExtendedReal::ratio(long long num, long long den) {
  if (den == 0) throw std::domain_error("zero denominator");
  return ExtendedReal(Rational(num, den));
}

bool ExtendedReal::is_zero() const { return sign() == 0; }

int ExtendedReal::sign() const {
  switch (kind_) {
    case Kind::exact:
      return exact_.sign();
    case Kind::inexact:
      return (inexact_ > 0) - (inexact_ < 0);
    case Kind::infinite:
      return 1;
  }
  return 0;
}

const Rational& ExtendedReal::exact() const {
  if (kind_ != Kind::exact) throw std::logic_error("value is not exact: " + to_string());
  return exact_;
}

Rational ExtendedReal::to_rational() const {
  switch (kind_) {
    case Kind::exact:
      return exact_;
    case Kind::inexact:
      return Rational(inexact_);
    case Kind::infinite:
      break;
  }
  throw std::domain_error("infinity has no rational value");
}

double ExtendedReal::to_double() const {
  switch (kind_) {
    case Kind::exact:
      return exact_.convert_to<double>();
    case Kind::inexact:
      return inexact_;
    case Kind::infinite:
      break;
  }
  return HUGE_VAL;
}

std::string ExtendedReal::to_string() const {
  switch (kind_) {
    case Kind::exact: {
      auto num = numerator(exact_);
      auto den = denominator(exact_);
      if (den == 1) return num.str();
      return num.str() + "/" + den.str();
    }
    case Kind::inexact:
      return format_double(inexact_);
    case Kind::infinite:
      break;
  }
  return "inf";
}

ExtendedReal ExtendedReal::operator-() const {
  switch (kind_) {
    case Kind::exact:
      return ExtendedReal(Rational(-exact_));
    case Kind::inexact:
      return ExtendedReal(-inexact_);
    case Kind::infinite:
      break;
  }
  throw std::domain_error("-inf is not representable");
}

ExtendedReal& ExtendedReal::operator+=(const ExtendedReal& rhs) {
  if (is_infinite() || rhs.is_infinite()) {
    *this = infinity();
  } else if (is_exact() && rhs.is_exact()) {
    exact_ += rhs.exact_;
  } else {
    *this = ExtendedReal(to_double() + rhs.to_double());
  }
  return *this;
}

ExtendedReal& ExtendedReal::operator-=(const ExtendedReal& rhs) {
  if (rhs.is_infinite()) throw std::domain_error("subtracting infinity");
  if (is_infinite()) return *this;
  if (is_exact() && rhs.is_exact()) {
    exact_ -= rhs.exact_;
  } else {
    *this = ExtendedReal(to_double() - rhs.to_double());
  }
  return *this;
}

ExtendedReal& ExtendedReal::operator*=(const ExtendedReal& rhs) {
  if (is_infinite() || rhs.is_infinite()) {
    const ExtendedReal& other = is_infinite() ? rhs : *this;
    if (other.is_zero()) {
      *this = ExtendedReal(0);
    } else if (other.sign() < 0) {
      throw std::domain_error("inf times a negative number");
    } else {
      *this = infinity();
    }
  } else if (is_exact() && rhs.is_exact()) {
    exact_ *= rhs.exact_;
  } else {
    *this = ExtendedReal(to_double() * rhs.to_double());
  }
  return *this;
}

ExtendedReal& ExtendedReal::operator/=(const ExtendedReal& rhs) {
  if (rhs.is_zero()) throw std::domain_error("division by zero");
  if (rhs.is_infinite()) {
    if (is_infinite()) throw std::domain_error("inf / inf");
    *this = ExtendedReal(0);
  } else if (is_infinite()) {
    if (rhs.sign() < 0) throw std::domain_error("inf divided by a negative number");
  } else if (is_exact() && rhs.is_exact()) {
    exact_ /= rhs.exact_;
  } else {
    *this = ExtendedReal(to_double() / rhs.to_double());
  }
  return *this;
}

bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.is_infinite() || b.is_infinite()) return a.is_infinite() && b.is_infinite();
  if (a.kind_ == ExtendedReal::Kind::inexact && b.kind_ == ExtendedReal::Kind::inexact) {
    return a.inexact_ == b.inexact_;
  }
  return a.to_rational() == b.to_rational();
}

bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.is_infinite()) return false;
  if (b.is_infinite()) return true;
  if (a.kind_ == ExtendedReal::Kind::inexact && b.kind_ == ExtendedReal::Kind::inexact) {
    return a.inexact_ < b.inexact_;
  }
  return a.to_rational() < b.to_rational();
}

std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) { return os << x.to_string(); }

bool looks_like_exact_number(std::string_view text) {
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) text.remove_prefix(1);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return all_digits(text);
  return all_digits(text.substr(0, slash)) && all_digits(text.substr(slash + 1));
}

ExtendedReal parse_extended_real(std::string_view text) {
  if (text == "inf" || text == "+inf" || text == "infinity") return ExtendedReal::infinity();
  if (looks_like_exact_number(text)) {
    std::string s(text);
    if (!s.empty() && s.front() == '+') s.erase(0, 1);
    const auto slash = s.find('/');
    if (slash == std::string::npos) return ExtendedReal(Rational(boost::multiprecision::cpp_int(s)));
    boost::multiprecision::cpp_int num(s.substr(0, slash));
    boost::multiprecision::cpp_int den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    return ExtendedReal(Rational(num, den));
  }
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return ExtendedReal(v);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ExtendedReal abs(const ExtendedReal& x) { return x.sign() < 0 ? -x : x; }

ExtendedReal square(const ExtendedReal& x) { return x * x; }

}  // namespace doob
