#include "doobdynkin/factorization.hpp"

#include <algorithm>
#include <stdexcept>

namespace doob {

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow2(unsigned k) { return cpp_int(1) << k; }

std::string describe_witness(const RandomMap& x, const RandomMap& y, std::size_t a, std::size_t b) {
  const auto& space = x.domain();
  return "atoms '" + space.atom(a) + "' and '" + space.atom(b) + "' share Y = " + y.at(a).to_string() +
         " but X = " + x.at(a).to_string() + " vs " + x.at(b).to_string();
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::partition_construction:
      return "partition-construction";
    case Provenance::simple_function_limit:
      return "simple-function-limit";
    case Provenance::closed_form:
      return "closed-form";
  }
  return "unknown";
}

FactorMap::FactorMap(std::vector<Value> domain, std::vector<Value> assignment,
                     std::vector<Value> x_codomain, bool defined_on_image_only, Provenance provenance)
    : domain_(std::move(domain)),
      assignment_(std::move(assignment)),
      x_codomain_(std::move(x_codomain)),
      defined_on_image_only_(defined_on_image_only),
      provenance_(provenance) {
  if (domain_.size() != assignment_.size()) {
    throw std::invalid_argument("factor map assignment is not total on its domain");
  }
}

std::optional<Value> FactorMap::operator()(const Value& y) const {
  auto it = std::find(domain_.begin(), domain_.end(), y);
  if (it == domain_.end()) return std::nullopt;
  return assignment_[static_cast<std::size_t>(it - domain_.begin())];
}

SeparationReport is_measurable_wrt(const RandomMap& x, const RandomMap& y) {
  if (!same_domain(x, y)) throw DomainMismatch("X and Y are defined on different spaces");
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> representative(y.codomain().size(), none);
  for (std::size_t atom = 0; atom < y.domain().size(); ++atom) {
    std::size_t& rep = representative[y.index_at(atom)];
    if (rep == none) {
      rep = atom;
    } else if (x.index_at(rep) != x.index_at(atom)) {
      return {false, std::pair{rep, atom}};
    }
  }
  return {true, std::nullopt};
}

FactorMap construct_factor(const RandomMap& x, const RandomMap& y) {
  SeparationReport report = is_measurable_wrt(x, y);
  if (!report.separated) {
    const auto [a, b] = *report.witness;
    throw NotMeasurable("X is not measurable w.r.t. the initial sigma-field of Y: " +
                            describe_witness(x, y, a, b),
                        std::move(report));
  }
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> representative(y.codomain().size(), none);
  for (std::size_t atom = 0; atom < y.domain().size(); ++atom) {
    if (representative[y.index_at(atom)] == none) representative[y.index_at(atom)] = atom;
  }
  std::vector<Value> domain;
  std::vector<Value> assignment;
  for (std::size_t v = 0; v < representative.size(); ++v) {
    if (representative[v] == none) continue;
    domain.push_back(y.codomain()[v]);
    assignment.push_back(x.at(representative[v]));
  }
  return FactorMap(std::move(domain), std::move(assignment),
                   std::vector<Value>(x.codomain().begin(), x.codomain().end()), true,
                   Provenance::partition_construction);
}

FactorMap extend_factor(const FactorMap& phi, std::span<const Value> full_codomain_y,
                        const Value& fallback) {
  if (!phi.defined_on_image_only()) throw std::invalid_argument("factor map is already extended");
  const auto xs = phi.x_codomain();
  if (std::find(xs.begin(), xs.end(), fallback) == xs.end()) {
    throw std::invalid_argument("default '" + fallback.to_string() + "' is outside the X codomain");
  }
  for (const auto& y : phi.domain()) {
    if (std::find(full_codomain_y.begin(), full_codomain_y.end(), y) == full_codomain_y.end()) {
      throw std::invalid_argument("full Y codomain misses image point '" + y.to_string() + "'");
    }
  }
  std::vector<Value> domain(full_codomain_y.begin(), full_codomain_y.end());
  std::vector<Value> assignment;
  assignment.reserve(domain.size());
  for (const auto& y : domain) assignment.push_back(phi(y).value_or(fallback));
  return FactorMap(std::move(domain), std::move(assignment), std::vector<Value>(xs.begin(), xs.end()),
                   false, phi.provenance());
}

ExtendedReal dyadic_truncation(const ExtendedReal& x, unsigned level) {
  if (x.sign() < 0) throw std::invalid_argument("dyadic truncation of a negative value");
  const cpp_int scale = pow2(level);
  if (x.is_infinite() || x >= ExtendedReal(Rational(scale))) {
    return x.is_exact() || x.is_infinite() ? ExtendedReal(Rational(scale))
                                           : ExtendedReal(Rational(scale).convert_to<double>());
  }
  const Rational q = x.to_rational();
  const cpp_int floored = (numerator(q) * scale) / denominator(q);
  const Rational truncated(floored, scale);
  if (x.is_exact()) return ExtendedReal(truncated);
  return ExtendedReal(truncated.convert_to<double>());
}

SimpleLimitFactor factor_via_simple_limit(const RandomMap& x, const RandomMap& y, unsigned levels) {
  if (levels == 0) throw std::invalid_argument("at least one level is required");
  for (const auto& v : x.codomain()) {
    if (!v.is_number() || v.number().is_infinite() || v.number().sign() < 0) {
      throw std::invalid_argument("simple-function limit needs finite non-negative X values, got '" +
                                  v.to_string() + "'");
    }
  }
  // Surface the original witness, not one from a truncated level.
  SeparationReport report = is_measurable_wrt(x, y);
  if (!report.separated) {
    const auto [a, b] = *report.witness;
    throw NotMeasurable("X is not measurable w.r.t. the initial sigma-field of Y: " +
                            describe_witness(x, y, a, b),
                        std::move(report));
  }

  SimpleLimitFactor out{FactorMap({}, {}, {}, true, Provenance::simple_function_limit), {}, false};
  out.levels.reserve(levels);
  for (unsigned k = 1; k <= levels; ++k) {
    std::vector<Value> truncated;
    truncated.reserve(x.domain().size());
    for (std::size_t atom = 0; atom < x.domain().size(); ++atom) {
      truncated.emplace_back(dyadic_truncation(x.at(atom).number(), k));
    }
    const RandomMap xk = RandomMap::from_values(x.domain_ptr(), std::move(truncated));
    FactorMap phik = construct_factor(xk, y);
    out.levels.emplace_back(std::vector<Value>(phik.domain().begin(), phik.domain().end()),
                            std::vector<Value>(phik.assignment().begin(), phik.assignment().end()),
                            std::vector<Value>(phik.x_codomain().begin(), phik.x_codomain().end()), true,
                            Provenance::simple_function_limit);
  }

  const auto domain = out.levels.front().domain();
  std::vector<Value> limit(out.levels.front().assignment().begin(),
                           out.levels.front().assignment().end());
  for (const auto& level : out.levels) {
    for (std::size_t i = 0; i < limit.size(); ++i) {
      if (limit[i] < level.assignment()[i]) limit[i] = level.assignment()[i];
    }
  }
  std::vector<Value> codomain(x.codomain().begin(), x.codomain().end());
  for (const auto& v : limit) {
    if (std::find(codomain.begin(), codomain.end(), v) == codomain.end()) codomain.push_back(v);
  }
  out.limit = FactorMap(std::vector<Value>(domain.begin(), domain.end()), std::move(limit),
                        std::move(codomain), true, Provenance::simple_function_limit);

  out.exact = true;
  for (std::size_t atom = 0; atom < x.domain().size(); ++atom) {
    if (out.limit(y.at(atom)) != x.at(atom)) {
      out.exact = false;
      break;
    }
  }
  return out;
}

std::optional<unsigned> sufficient_levels(const RandomMap& x) {
  unsigned needed = 1;
  for (const auto& v : x.codomain()) {
    if (!v.is_number() || v.number().is_infinite() || v.number().sign() < 0) return std::nullopt;
    const Rational q = v.number().to_rational();
    const cpp_int den = denominator(q);
    if ((den & (den - 1)) != 0) return std::nullopt;
    const unsigned frac_bits = den == 1 ? 0U : static_cast<unsigned>(boost::multiprecision::msb(den));
    unsigned cap_bits = 0;
    while (Rational(pow2(cap_bits)) < q) ++cap_bits;
    needed = std::max({needed, frac_bits, cap_bits});
  }
  return needed;
}

SeparationReport check_t0_separation(std::span<const Value> points,
                                     std::span<const std::vector<Value>> opens) {
  std::vector<std::vector<bool>> member(opens.size(), std::vector<bool>(points.size(), false));
  for (std::size_t s = 0; s < opens.size(); ++s) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      member[s][p] = std::find(opens[s].begin(), opens[s].end(), points[p]) != opens[s].end();
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const bool told_apart = std::any_of(member.begin(), member.end(),
                                          [&](const auto& row) { return row[i] != row[j]; });
      if (!told_apart) return {false, std::pair{i, j}};
    }
  }
  return {true, std::nullopt};
}

}  // namespace doob
