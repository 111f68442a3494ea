#pragma once

#include "doobdynkin/extended_real.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace doob {

/// A codomain point of a random map: an opaque label or a number.
///
/// Numbers order before labels; numbers compare by exact value.
class Value {
 public:
  Value() = default;
  Value(ExtendedReal x) : v_(std::move(x)) {}  // NOLINT
  Value(int x) : v_(ExtendedReal(x)) {}         // NOLINT
  Value(double x) : v_(ExtendedReal(x)) {}      // NOLINT

  static Value label(std::string s) {
    Value v;
    v.v_ = std::move(s);
    return v;
  }

  bool is_number() const { return std::holds_alternative<ExtendedReal>(v_); }
  bool is_label() const { return !is_number(); }
  const ExtendedReal& number() const;
  const std::string& text() const;

  std::string to_string() const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
  friend bool operator<(const Value& a, const Value& b);

 private:
  std::variant<std::string, ExtendedReal> v_ = ExtendedReal(0);
};

/// Exact-number-shaped text ("3", "-1/2") becomes a number, anything else a
/// label. Decimal literals stay labels here; JSON numbers go through the
/// io layer instead.
Value parse_value(std::string_view text);

}  // namespace doob
