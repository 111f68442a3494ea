#pragma once

#include "doobdynkin/condexp.hpp"
#include "doobdynkin/measure.hpp"
#include "doobdynkin/risk.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace doob::io {

using json = nlohmann::ordered_json;

/// Thrown for malformed input; the message names the offending field.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& field, const std::string& problem)
      : std::runtime_error(field + ": " + problem) {}
};

/// JSON integers and "p/q" strings are exact, JSON floats are inexact,
/// "inf" is infinity.
ExtendedReal real_from_json(const json& j, const std::string& field);
/// Numbers and exact-number strings become numbers; other strings are labels.
Value value_from_json(const json& j, const std::string& field);

/// Exact integers that fit in 64 bits become JSON integers, other exact
/// values "p/q" strings, inexact values JSON numbers, infinity "inf".
json to_json(const ExtendedReal& x);
json to_json(const Value& v);

/// { "atoms": [...], "weights": [...], "maps": {name: [...]},
///   "codomains": {name: [...]}?, "pieces": [[atom, ...], ...]? }
struct SpaceFile {
  SpacePtr space;
  std::map<std::string, RandomMap> maps;
  std::optional<SigmaFiniteWitness> witness;

  const RandomMap& map(const std::string& name) const;
};

SpaceFile space_from_json(const json& j);

/// { "kind": "finite", "thetas": [...], "prior": [...], "ys": [...],
///   "likelihood": [[...], ...], "psi": [number or [numbers], ...] }
FiniteModel finite_model_from_json(const json& j);

/// { "features": [ {"kind": "constant"} | {"kind": "power", "degree": k} |
///   {"kind": "indicator", "value": v} |
///   {"kind": "interval", "lower": a, "upper": b}, ... ] }
FeatureBasis basis_from_json(const json& j);

json fit_to_json(const ProjectionFit& fit, const FeatureBasis& basis, const json& basis_spec);

/// Two numeric columns "y,gamma" with a header line.
std::vector<Sample> read_samples_csv(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Canonical text form of a report: two-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace doob::io
