#pragma once

#include "doobdynkin/errors.hpp"
#include "doobdynkin/extended_real.hpp"
#include "doobdynkin/value.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace doob {

/// A finite carrier with a measure given by its atom weights.
class FiniteSpace {
 public:
  FiniteSpace(std::vector<std::string> atoms, std::vector<ExtendedReal> weights);

  /// Atoms "1".."n", each of weight 1.
  static FiniteSpace counting(std::size_t n);

  std::size_t size() const { return atoms_.size(); }
  const std::string& atom(std::size_t i) const { return atoms_.at(i); }
  std::span<const std::string> atoms() const { return atoms_; }
  const ExtendedReal& weight(std::size_t i) const { return weights_.at(i); }
  std::span<const ExtendedReal> weights() const { return weights_; }
  std::optional<std::size_t> index_of(std::string_view atom) const;

  ExtendedReal total_mass() const;
  /// Atoms of weight +inf are representable but flagged here.
  bool has_infinite_atom() const;

  friend bool operator==(const FiniteSpace& a, const FiniteSpace& b);

 private:
  std::vector<std::string> atoms_;
  std::vector<ExtendedReal> weights_;
};

using SpacePtr = std::shared_ptr<const FiniteSpace>;

SpacePtr make_space(std::vector<std::string> atoms, std::vector<ExtendedReal> weights);

/// Pieces B_1..B_m covering the support, each of finite mass.
struct SigmaFiniteWitness {
  std::vector<std::vector<std::size_t>> pieces;

  /// One piece per atom.
  static SigmaFiniteWitness singletons(const FiniteSpace& space);
  /// A single piece holding every atom.
  static SigmaFiniteWitness whole(const FiniteSpace& space);

  ExtendedReal piece_mass(const FiniteSpace& space, std::size_t piece) const;
};

struct SigmaFiniteVerdict {
  bool sigma_finite = false;
  std::string diagnostic;  // empty when sigma_finite
};

SigmaFiniteVerdict is_sigma_finite(const FiniteSpace& space, const SigmaFiniteWitness& witness);

/// A map from the atoms of a space into an ordered list of distinct values.
class RandomMap {
 public:
  RandomMap(SpacePtr domain, std::vector<Value> codomain, std::vector<std::size_t> assignment);

  /// Codomain is the values in order of first appearance, followed by any
  /// `extra` values not already present.
  static RandomMap from_values(SpacePtr domain, std::vector<Value> per_atom,
                               std::vector<Value> extra = {});

  const FiniteSpace& domain() const { return *domain_; }
  const SpacePtr& domain_ptr() const { return domain_; }
  std::span<const Value> codomain() const { return codomain_; }
  std::size_t index_at(std::size_t atom) const { return assignment_.at(atom); }
  const Value& at(std::size_t atom) const { return codomain_[assignment_.at(atom)]; }
  std::span<const std::size_t> assignment() const { return assignment_; }
  std::optional<std::size_t> find(const Value& v) const;
  /// Codomain indices hit by some atom, ascending.
  std::vector<std::size_t> image() const;

 private:
  SpacePtr domain_;
  std::vector<Value> codomain_;
  std::vector<std::size_t> assignment_;
};

/// Same carrier (pointer identity or equal atoms and weights).
bool same_domain(const RandomMap& a, const RandomMap& b);

/// A finite sigma-field represented by its generating partition.
///
/// Cells are kept in canonical form: each sorted, ordered by least element.
class Partition {
 public:
  Partition(std::size_t atom_count, std::vector<std::vector<std::size_t>> cells);

  static Partition trivial(std::size_t atom_count);
  static Partition discrete(std::size_t atom_count);

  std::size_t atom_count() const { return cell_of_.size(); }
  std::span<const std::vector<std::size_t>> cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  std::size_t cell_of(std::size_t atom) const { return cell_of_.at(atom); }
  /// Every cell of *this lies inside a cell of `coarser`.
  bool is_finer_than(const Partition& coarser) const;

  friend bool operator==(const Partition& a, const Partition& b) { return a.cells_ == b.cells_; }

 private:
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<std::size_t> cell_of_;
};

struct PushforwardLaw {
  std::vector<Value> values;
  std::vector<ExtendedReal> mass;

  const ExtendedReal& mass_of(const Value& v) const;
  ExtendedReal total() const;
};

PushforwardLaw pushforward(const FiniteSpace& space, const RandomMap& y);
Partition initial_sigma_field(const RandomMap& y);
Partition refine(const Partition& p, const Partition& q);

}  // namespace doob
