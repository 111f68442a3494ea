#pragma once

#include "doobdynkin/errors.hpp"
#include "doobdynkin/measure.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace doob {

enum class Provenance { partition_construction, simple_function_limit, closed_form };

std::string_view to_string(Provenance p);

/// A map phi on values of Y with X = phi(Y).
class FactorMap {
 public:
  FactorMap(std::vector<Value> domain, std::vector<Value> assignment, std::vector<Value> x_codomain,
            bool defined_on_image_only, Provenance provenance);

  std::span<const Value> domain() const { return domain_; }
  std::span<const Value> assignment() const { return assignment_; }
  /// Codomain of the factored X; extension defaults must come from here.
  std::span<const Value> x_codomain() const { return x_codomain_; }
  bool defined_on_image_only() const { return defined_on_image_only_; }
  Provenance provenance() const { return provenance_; }

  /// phi(y), or nullopt when y is outside the declared domain.
  std::optional<Value> operator()(const Value& y) const;

 private:
  std::vector<Value> domain_;
  std::vector<Value> assignment_;
  std::vector<Value> x_codomain_;
  bool defined_on_image_only_;
  Provenance provenance_;
};

/// Separated iff X is constant on every cell of the initial sigma-field of Y.
SeparationReport is_measurable_wrt(const RandomMap& x, const RandomMap& y);

/// Builds phi on Y(Omega) by reading X off one atom per Y-fiber.
/// Throws NotMeasurable carrying the witness pair when X does not factor.
FactorMap construct_factor(const RandomMap& x, const RandomMap& y);

/// Extends phi from the image to `full_codomain_y`, sending new points to
/// `fallback`, which must lie in the X codomain.
FactorMap extend_factor(const FactorMap& phi, std::span<const Value> full_codomain_y,
                        const Value& fallback);

struct SimpleLimitFactor {
  FactorMap limit;                 // pointwise max over levels
  std::vector<FactorMap> levels;   // phi_1 .. phi_n
  bool exact = false;              // limit(Y(w)) == X(w) for every atom
};

/// Dyadic truncation at level k: min(2^k, floor(2^k x) / 2^k), x >= 0.
ExtendedReal dyadic_truncation(const ExtendedReal& x, unsigned level);

/// Factors X through Y via the increasing sequence of dyadic simple
/// functions X_k = min(2^k, floor(2^k X)/2^k), k = 1..levels.
SimpleLimitFactor factor_via_simple_limit(const RandomMap& x, const RandomMap& y, unsigned levels);

/// Smallest level count at which every dyadic truncation of X's values is
/// the identity, or nullopt when some value is not a dyadic rational.
std::optional<unsigned> sufficient_levels(const RandomMap& x);

/// T0 check on a finite family of sets: every distinct pair of points has a
/// set containing exactly one of them.
SeparationReport check_t0_separation(std::span<const Value> points,
                                     std::span<const std::vector<Value>> opens);

}  // namespace doob
