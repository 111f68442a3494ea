#include "doobdynkin/value.hpp"

#include <stdexcept>

namespace doob {

const ExtendedReal& Value::number() const {
  if (!is_number()) throw std::invalid_argument("value '" + text() + "' is a label, not a number");
  return std::get<ExtendedReal>(v_);
}

const std::string& Value::text() const {
  if (is_number()) throw std::logic_error("value is a number, not a label");
  return std::get<std::string>(v_);
}

std::string Value::to_string() const { return is_number() ? number().to_string() : text(); }

bool operator==(const Value& a, const Value& b) {
  if (a.is_number() != b.is_number()) return false;
  if (a.is_number()) return a.number() == b.number();
  return a.text() == b.text();
}

bool operator<(const Value& a, const Value& b) {
  if (a.is_number() != b.is_number()) return a.is_number();
  if (a.is_number()) return a.number() < b.number();
  return a.text() < b.text();
}

Value parse_value(std::string_view text) {
  if (looks_like_exact_number(text)) return Value(parse_extended_real(text));
  return Value::label(std::string(text));
}

}  // namespace doob
