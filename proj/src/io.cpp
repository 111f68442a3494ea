#include "doobdynkin/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

namespace doob::io {

namespace {

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + "." + key, "missing");
  return j.at(key);
}

const json& require_array(const json& j, const std::string& key, const std::string& where) {
  const json& a = require(j, key, where);
  if (!a.is_array()) throw SchemaError(where + "." + key, "expected an array");
  return a;
}

std::string atom_id(const json& j, const std::string& field) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
  throw SchemaError(field, "atom identifiers must be strings or integers");
}

double number_field(const json& j, const std::string& key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) throw SchemaError(where + "." + key, "expected a number");
  return v.get<double>();
}

}  // namespace

ExtendedReal real_from_json(const json& j, const std::string& field) {
  try {
    if (j.is_number_integer()) return ExtendedReal(j.get<long long>());
    if (j.is_number_unsigned()) {
      return ExtendedReal(Rational(boost::multiprecision::cpp_int(j.get<unsigned long long>())));
    }
    if (j.is_number_float()) return ExtendedReal(j.get<double>());
    if (j.is_string()) return parse_extended_real(j.get<std::string>());
  } catch (const std::exception& e) {
    throw SchemaError(field, e.what());
  }
  throw SchemaError(field, "expected a number or a \"p/q\" string");
}

Value value_from_json(const json& j, const std::string& field) {
  if (j.is_string()) return parse_value(j.get<std::string>());
  if (j.is_number()) return Value(real_from_json(j, field));
  throw SchemaError(field, "expected a string or a number");
}

json to_json(const ExtendedReal& x) {
  if (x.is_infinite()) return "inf";
  if (!x.is_exact()) return x.to_double();
  const Rational& q = x.exact();
  if (denominator(q) == 1) {
    const auto num = numerator(q);
    if (num >= std::numeric_limits<long long>::min() && num <= std::numeric_limits<long long>::max()) {
      return num.convert_to<long long>();
    }
  }
  return x.to_string();
}

json to_json(const Value& v) { return v.is_number() ? to_json(v.number()) : json(v.text()); }

const RandomMap& SpaceFile::map(const std::string& name) const {
  auto it = maps.find(name);
  if (it == maps.end()) throw SchemaError("maps." + name, "no such map");
  return it->second;
}

SpaceFile space_from_json(const json& j) {
  const json& atoms_j = require_array(j, "atoms", "space");
  const json& weights_j = require_array(j, "weights", "space");
  if (atoms_j.size() != weights_j.size()) throw SchemaError("space.weights", "length differs from atoms");
  std::vector<std::string> atoms;
  std::vector<ExtendedReal> weights;
  for (std::size_t i = 0; i < atoms_j.size(); ++i) {
    atoms.push_back(atom_id(atoms_j[i], "space.atoms[" + std::to_string(i) + "]"));
    weights.push_back(real_from_json(weights_j[i], "space.weights[" + std::to_string(i) + "]"));
  }
  SpaceFile file;
  try {
    file.space = make_space(std::move(atoms), std::move(weights));
  } catch (const std::invalid_argument& e) {
    throw SchemaError("space", e.what());
  }

  if (j.contains("maps")) {
    const json& maps = j.at("maps");
    if (!maps.is_object()) throw SchemaError("space.maps", "expected an object");
    const json* codomains = j.contains("codomains") ? &j.at("codomains") : nullptr;
    for (const auto& [name, values_j] : maps.items()) {
      const std::string field = "space.maps." + name;
      if (!values_j.is_array() || values_j.size() != file.space->size()) {
        throw SchemaError(field, "expected one value per atom");
      }
      std::vector<Value> values;
      for (std::size_t i = 0; i < values_j.size(); ++i) {
        values.push_back(value_from_json(values_j[i], field + "[" + std::to_string(i) + "]"));
      }
      std::vector<Value> extra;
      if (codomains && codomains->contains(name)) {
        const json& cod = codomains->at(name);
        if (!cod.is_array()) throw SchemaError("space.codomains." + name, "expected an array");
        for (std::size_t i = 0; i < cod.size(); ++i) {
          extra.push_back(value_from_json(cod[i], "space.codomains." + name + "[" + std::to_string(i) + "]"));
        }
      }
      file.maps.emplace(name, RandomMap::from_values(file.space, std::move(values), std::move(extra)));
    }
  }

  if (j.contains("pieces")) {
    const json& pieces = j.at("pieces");
    if (!pieces.is_array()) throw SchemaError("space.pieces", "expected an array of arrays");
    SigmaFiniteWitness w;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const std::string field = "space.pieces[" + std::to_string(k) + "]";
      if (!pieces[k].is_array()) throw SchemaError(field, "expected an array of atoms");
      std::vector<std::size_t> piece;
      for (const auto& a : pieces[k]) {
        auto idx = file.space->index_of(atom_id(a, field));
        if (!idx) throw SchemaError(field, "unknown atom '" + atom_id(a, field) + "'");
        piece.push_back(*idx);
      }
      w.pieces.push_back(std::move(piece));
    }
    file.witness = std::move(w);
  }
  return file;
}

FiniteModel finite_model_from_json(const json& j) {
  const std::string where = "model";
  const json& thetas_j = require_array(j, "thetas", where);
  const json& prior_j = require_array(j, "prior", where);
  const json& ys_j = require_array(j, "ys", where);
  const json& lik_j = require_array(j, "likelihood", where);
  const json& psi_j = require_array(j, "psi", where);
  std::vector<Value> thetas;
  std::vector<ExtendedReal> prior;
  std::vector<Value> ys;
  std::vector<std::vector<ExtendedReal>> likelihood;
  std::vector<Action> focus;
  for (std::size_t i = 0; i < thetas_j.size(); ++i) {
    thetas.push_back(value_from_json(thetas_j[i], "model.thetas[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < prior_j.size(); ++i) {
    prior.push_back(real_from_json(prior_j[i], "model.prior[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < ys_j.size(); ++i) {
    ys.push_back(value_from_json(ys_j[i], "model.ys[" + std::to_string(i) + "]"));
  }
  for (std::size_t t = 0; t < lik_j.size(); ++t) {
    const std::string field = "model.likelihood[" + std::to_string(t) + "]";
    if (!lik_j[t].is_array()) throw SchemaError(field, "expected an array");
    std::vector<ExtendedReal> row;
    for (std::size_t k = 0; k < lik_j[t].size(); ++k) {
      row.push_back(real_from_json(lik_j[t][k], field + "[" + std::to_string(k) + "]"));
    }
    likelihood.push_back(std::move(row));
  }
  for (std::size_t t = 0; t < psi_j.size(); ++t) {
    const std::string field = "model.psi[" + std::to_string(t) + "]";
    Action a;
    if (psi_j[t].is_array()) {
      for (std::size_t d = 0; d < psi_j[t].size(); ++d) {
        a.push_back(real_from_json(psi_j[t][d], field + "[" + std::to_string(d) + "]"));
      }
    } else {
      a.push_back(real_from_json(psi_j[t], field));
    }
    focus.push_back(std::move(a));
  }
  try {
    return FiniteModel(std::move(thetas), std::move(prior), std::move(ys), std::move(likelihood),
                       std::move(focus));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where, e.what());
  }
}

FeatureBasis basis_from_json(const json& j) {
  const json& features = require_array(j, "features", "basis");
  FeatureBasis basis;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string field = "basis.features[" + std::to_string(i) + "]";
    const json& f = features[i];
    const json& kind_j = require(f, "kind", field);
    if (!kind_j.is_string()) throw SchemaError(field + ".kind", "expected a string");
    const auto kind = kind_j.get<std::string>();
    try {
      if (kind == "constant") {
        basis.add(FeatureBasis::constant());
      } else if (kind == "power") {
        const json& d = require(f, "degree", field);
        if (!d.is_number_integer()) throw SchemaError(field + ".degree", "expected an integer");
        basis.add(FeatureBasis::power(d.get<int>()));
      } else if (kind == "indicator") {
        basis.add(FeatureBasis::indicator(number_field(f, "value", field)));
      } else if (kind == "interval") {
        basis.add(FeatureBasis::interval(number_field(f, "lower", field), number_field(f, "upper", field)));
      } else {
        throw SchemaError(field + ".kind", "unknown feature kind '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw SchemaError(field, e.what());
    }
  }
  if (basis.size() == 0) throw SchemaError("basis.features", "empty");
  return basis;
}

json fit_to_json(const ProjectionFit& fit, const FeatureBasis& basis, const json& basis_spec) {
  json out;
  out["schema"] = "doobdynkin.fit/1";
  json names = json::array();
  for (const auto& f : basis.features()) names.push_back(f.name);
  out["features"] = names;
  out["basis"] = basis_spec;
  out["coefficients"] = fit.coefficients;
  out["residual_risk"] = fit.residual_risk;
  out["sample_count"] = fit.sample_count;
  out["condition"] = fit.condition;
  out["ridge"] = fit.ridge;
  out["min_norm"] = fit.min_norm;
  return out;
}

std::vector<Sample> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != "y,gamma") throw SchemaError("samples line 1", "expected header 'y,gamma'");
      continue;
    }
    const auto comma = line.find(',');
    const std::string field = "samples line " + std::to_string(line_no);
    if (comma == std::string::npos) throw SchemaError(field, "expected two columns");
    try {
      samples.push_back({parse_extended_real(line.substr(0, comma)).to_double(),
                         parse_extended_real(line.substr(comma + 1)).to_double()});
    } catch (const std::exception& e) {
      throw SchemaError(field, e.what());
    }
  }
  return samples;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string(), e.what());
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace doob::io
