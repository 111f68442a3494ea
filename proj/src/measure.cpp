#include "doobdynkin/measure.hpp"

#include "doobdynkin/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace doob {

FiniteSpace::FiniteSpace(std::vector<std::string> atoms, std::vector<ExtendedReal> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.size() != weights_.size()) {
    throw std::invalid_argument("atoms and weights differ in length");
  }
  std::set<std::string_view> seen;
  for (const auto& a : atoms_) {
    if (!seen.insert(a).second) throw std::invalid_argument("duplicate atom '" + a + "'");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].sign() < 0) {
      throw std::invalid_argument("negative weight on atom '" + atoms_[i] + "'");
    }
  }
}

FiniteSpace FiniteSpace::counting(std::size_t n) {
  std::vector<std::string> atoms;
  atoms.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) atoms.push_back(std::to_string(i));
  return FiniteSpace(std::move(atoms), std::vector<ExtendedReal>(n, ExtendedReal(1)));
}

std::optional<std::size_t> FiniteSpace::index_of(std::string_view atom) const {
  auto it = std::find(atoms_.begin(), atoms_.end(), atom);
  if (it == atoms_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - atoms_.begin());
}

ExtendedReal FiniteSpace::total_mass() const {
  ExtendedReal total(0);
  for (const auto& w : weights_) total += w;
  return total;
}

bool FiniteSpace::has_infinite_atom() const {
  return std::any_of(weights_.begin(), weights_.end(),
                     [](const ExtendedReal& w) { return w.is_infinite(); });
}

bool operator==(const FiniteSpace& a, const FiniteSpace& b) {
  return a.atoms_ == b.atoms_ && a.weights_ == b.weights_;
}

SpacePtr make_space(std::vector<std::string> atoms, std::vector<ExtendedReal> weights) {
  return std::make_shared<const FiniteSpace>(std::move(atoms), std::move(weights));
}

SigmaFiniteWitness SigmaFiniteWitness::singletons(const FiniteSpace& space) {
  SigmaFiniteWitness w;
  for (std::size_t i = 0; i < space.size(); ++i) w.pieces.push_back({i});
  return w;
}

SigmaFiniteWitness SigmaFiniteWitness::whole(const FiniteSpace& space) {
  SigmaFiniteWitness w;
  std::vector<std::size_t> all(space.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  w.pieces.push_back(std::move(all));
  return w;
}

ExtendedReal SigmaFiniteWitness::piece_mass(const FiniteSpace& space, std::size_t piece) const {
  ExtendedReal m(0);
  for (std::size_t atom : pieces.at(piece)) m += space.weight(atom);
  return m;
}

SigmaFiniteVerdict is_sigma_finite(const FiniteSpace& space, const SigmaFiniteWitness& witness) {
  std::vector<bool> covered(space.size(), false);
  for (const auto& piece : witness.pieces) {
    for (std::size_t atom : piece) {
      if (atom >= space.size()) throw std::out_of_range("witness references a missing atom");
      covered[atom] = true;
    }
  }
  // An infinite atom can neither sit in a finite piece nor be left out.
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.weight(i).is_infinite()) {
      return {false, "infinite atom uncovered by finite piece: " + space.atom(i)};
    }
  }
  for (std::size_t k = 0; k < witness.pieces.size(); ++k) {
    if (witness.piece_mass(space, k).is_infinite()) {
      return {false, "piece " + std::to_string(k) + " has infinite mass"};
    }
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!covered[i] && !space.weight(i).is_zero()) {
      return {false, "support atom not covered by any piece: " + space.atom(i)};
    }
  }
  return {true, {}};
}

RandomMap::RandomMap(SpacePtr domain, std::vector<Value> codomain,
                     std::vector<std::size_t> assignment)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), assignment_(std::move(assignment)) {
  if (!domain_) throw std::invalid_argument("random map without a domain");
  if (assignment_.size() != domain_->size()) {
    throw std::invalid_argument("assignment is not total on the atoms");
  }
  for (std::size_t idx : assignment_) {
    if (idx >= codomain_.size()) throw std::invalid_argument("assigned value outside the codomain");
  }
  std::vector<Value> sorted = codomain_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("codomain values are not distinct");
  }
}

RandomMap RandomMap::from_values(SpacePtr domain, std::vector<Value> per_atom,
                                 std::vector<Value> extra) {
  std::vector<Value> codomain;
  std::map<Value, std::size_t> index;
  std::vector<std::size_t> assignment;
  assignment.reserve(per_atom.size());
  auto intern = [&](Value v) {
    auto [it, inserted] = index.emplace(v, codomain.size());
    if (inserted) codomain.push_back(std::move(v));
    return it->second;
  };
  for (auto& v : per_atom) assignment.push_back(intern(std::move(v)));
  for (auto& v : extra) intern(std::move(v));
  return RandomMap(std::move(domain), std::move(codomain), std::move(assignment));
}

std::optional<std::size_t> RandomMap::find(const Value& v) const {
  auto it = std::find(codomain_.begin(), codomain_.end(), v);
  if (it == codomain_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - codomain_.begin());
}

std::vector<std::size_t> RandomMap::image() const {
  std::vector<bool> hit(codomain_.size(), false);
  for (std::size_t idx : assignment_) hit[idx] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (hit[i]) out.push_back(i);
  }
  return out;
}

bool same_domain(const RandomMap& a, const RandomMap& b) {
  return a.domain_ptr() == b.domain_ptr() || a.domain() == b.domain();
}

Partition::Partition(std::size_t atom_count, std::vector<std::vector<std::size_t>> cells)
    : cells_(std::move(cells)), cell_of_(atom_count, atom_count) {
  for (auto& cell : cells_) {
    if (cell.empty()) throw std::invalid_argument("partition has an empty cell");
    std::sort(cell.begin(), cell.end());
  }
  std::sort(cells_.begin(), cells_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (std::size_t atom : cells_[c]) {
      if (atom >= atom_count) throw std::invalid_argument("partition cell references a missing atom");
      if (cell_of_[atom] != atom_count) throw std::invalid_argument("partition cells overlap");
      cell_of_[atom] = c;
    }
  }
  for (std::size_t atom = 0; atom < atom_count; ++atom) {
    if (cell_of_[atom] == atom_count) throw std::invalid_argument("partition does not cover every atom");
  }
}

Partition Partition::trivial(std::size_t atom_count) {
  if (atom_count == 0) return Partition(0, {});
  std::vector<std::size_t> all(atom_count);
  for (std::size_t i = 0; i < atom_count; ++i) all[i] = i;
  return Partition(atom_count, {std::move(all)});
}

Partition Partition::discrete(std::size_t atom_count) {
  std::vector<std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < atom_count; ++i) cells.push_back({i});
  return Partition(atom_count, std::move(cells));
}

bool Partition::is_finer_than(const Partition& coarser) const {
  if (coarser.atom_count() != atom_count()) return false;
  for (const auto& cell : cells_) {
    const std::size_t target = coarser.cell_of(cell.front());
    for (std::size_t atom : cell) {
      if (coarser.cell_of(atom) != target) return false;
    }
  }
  return true;
}

const ExtendedReal& PushforwardLaw::mass_of(const Value& v) const {
  auto it = std::find(values.begin(), values.end(), v);
  if (it == values.end()) throw std::out_of_range("value '" + v.to_string() + "' not in the codomain");
  return mass[static_cast<std::size_t>(it - values.begin())];
}

ExtendedReal PushforwardLaw::total() const {
  ExtendedReal t(0);
  for (const auto& m : mass) t += m;
  return t;
}

PushforwardLaw pushforward(const FiniteSpace& space, const RandomMap& y) {
  if (!(space == y.domain())) throw DomainMismatch("pushforward: map is defined on another space");
  PushforwardLaw law;
  law.values.assign(y.codomain().begin(), y.codomain().end());
  law.mass.assign(law.values.size(), ExtendedReal(0));
  for (std::size_t atom = 0; atom < space.size(); ++atom) {
    law.mass[y.index_at(atom)] += space.weight(atom);
  }
  return law;
}

Partition initial_sigma_field(const RandomMap& y) {
  std::vector<std::vector<std::size_t>> by_value(y.codomain().size());
  for (std::size_t atom = 0; atom < y.domain().size(); ++atom) {
    by_value[y.index_at(atom)].push_back(atom);
  }
  std::vector<std::vector<std::size_t>> cells;
  for (auto& c : by_value) {
    if (!c.empty()) cells.push_back(std::move(c));
  }
  return Partition(y.domain().size(), std::move(cells));
}

Partition refine(const Partition& p, const Partition& q) {
  if (p.atom_count() != q.atom_count()) throw DomainMismatch("refine: partitions of different atom sets");
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> meet;
  for (std::size_t atom = 0; atom < p.atom_count(); ++atom) {
    meet[{p.cell_of(atom), q.cell_of(atom)}].push_back(atom);
  }
  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(meet.size());
  for (auto& [key, cell] : meet) cells.push_back(std::move(cell));
  return Partition(p.atom_count(), std::move(cells));
}

}  // namespace doob
