#include "doobdynkin/condexp.hpp"
#include "doobdynkin/factorization.hpp"
#include "doobdynkin/fiducial.hpp"
#include "doobdynkin/io.hpp"
#include "doobdynkin/kalman_bucy.hpp"
#include "doobdynkin/risk.hpp"

#include "cli.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace doob;

namespace {

py::object fraction_type() { return py::module_::import("fractions").attr("Fraction"); }

ExtendedReal to_real(const py::handle& h) {
  if (py::isinstance<py::bool_>(h)) throw py::type_error("booleans are not numbers");
  if (py::isinstance<py::int_>(h)) return ExtendedReal(parse_extended_real(py::str(h).cast<std::string>()));
  if (py::isinstance<py::float_>(h)) return ExtendedReal(h.cast<double>());
  if (py::isinstance(h, fraction_type())) {
    const std::string num = py::str(h.attr("numerator")).cast<std::string>();
    const std::string den = py::str(h.attr("denominator")).cast<std::string>();
    return parse_extended_real(num + "/" + den);
  }
  if (py::isinstance<py::str>(h)) return parse_extended_real(h.cast<std::string>());
  throw py::type_error("expected int, float, Fraction or str");
}

Value to_value(const py::handle& h) {
  if (py::isinstance<py::str>(h)) return parse_value(h.cast<std::string>());
  return Value(to_real(h));
}

py::object from_real(const ExtendedReal& x) {
  if (x.is_infinite()) return py::float_(HUGE_VAL);
  if (!x.is_exact()) return py::float_(x.to_double());
  const Rational& q = x.exact();
  py::object builtins = py::module_::import("builtins");
  py::object num = builtins.attr("int")(numerator(q).str());
  py::object den = builtins.attr("int")(denominator(q).str());
  if (denominator(q) == 1) return num;
  return fraction_type()(num, den);
}

py::object from_value(const Value& v) { return v.is_number() ? from_real(v.number()) : py::str(v.text()); }

SpacePtr space_of(const std::vector<std::string>& atoms, const py::sequence& weights) {
  std::vector<ExtendedReal> w;
  for (const auto& h : weights) w.push_back(to_real(h));
  return make_space(atoms, std::move(w));
}

RandomMap map_of(const SpacePtr& space, const py::sequence& values) {
  std::vector<Value> v;
  for (const auto& h : values) v.push_back(to_value(h));
  return RandomMap::from_values(space, std::move(v));
}

py::dict factorize(const std::vector<std::string>& atoms, const py::sequence& weights, const py::sequence& x,
                   const py::sequence& y) {
  const SpacePtr space = space_of(atoms, weights);
  const RandomMap xm = map_of(space, x);
  const RandomMap ym = map_of(space, y);
  py::dict out;
  try {
    const FactorMap phi = construct_factor(xm, ym);
    py::dict table;
    for (std::size_t k = 0; k < phi.domain().size(); ++k) table[from_value(phi.domain()[k])] = from_value(phi.assignment()[k]);
    out["status"] = "measurable";
    out["phi"] = table;
  } catch (const NotMeasurable& e) {
    const auto [a, b] = e.report().witness.value();
    out["status"] = "not_measurable";
    out["witness"] = py::make_tuple(atoms[a], atoms[b]);
  }
  return out;
}

py::list condexp(const std::vector<std::string>& atoms, const py::sequence& weights, const py::sequence& gamma,
                 const py::sequence& y) {
  const SpacePtr space = space_of(atoms, weights);
  const CondExpTable table = condexp_discrete(*space, map_of(space, gamma), map_of(space, y));
  py::list out;
  for (const auto& e : table.entries) out.append(py::make_tuple(from_value(e.y), from_real(e.phi), from_real(e.mass)));
  for (const auto& v : table.undefined) out.append(py::make_tuple(from_value(v), py::none(), 0));
  return out;
}

py::dict project(const std::vector<double>& ys, const std::vector<double>& gammas, const std::string& basis_json,
                 std::optional<double> ridge, bool min_norm) {
  if (ys.size() != gammas.size()) throw py::value_error("ys and gammas differ in length");
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < ys.size(); ++i) samples.push_back({ys[i], gammas[i]});
  const FeatureBasis basis = io::basis_from_json(io::json::parse(basis_json));
  ProjectionOptions opt;
  opt.ridge = ridge;
  opt.min_norm_fallback = min_norm;
  const ProjectionFit fit = project_l2(samples, basis, opt);
  py::dict out;
  out["coefficients"] = fit.coefficients;
  out["residual_risk"] = fit.residual_risk;
  out["condition"] = fit.condition;
  out["ridge"] = fit.ridge;
  out["min_norm"] = fit.min_norm;
  out["residual_correlations"] = residual_correlations(samples, basis, fit.coefficients);
  return out;
}

py::dict fiducial(double y, const std::string& noise, const std::string& psi, std::size_t n, std::uint64_t seed) {
  const LocationModel model{Noise::parse(noise), Focus::parse(psi)};
  validate(model);
  const auto post = fiducial_posterior(model, y, n, seed);
  py::dict out;
  const Estimate e = posterior_point_estimate(post, model.psi);
  const Estimate r = posterior_risk_location(post, model.psi);
  const Estimate e_mc = posterior_point_estimate(post, model.psi, Route::samples);
  const Estimate r_mc = posterior_risk_location(post, model.psi, Route::samples);
  out["estimate"] = e.value;
  out["posterior_risk"] = r.value;
  out["estimate_mc"] = py::make_tuple(e_mc.value, e_mc.stderr);
  out["posterior_risk_mc"] = py::make_tuple(r_mc.value, r_mc.stderr);
  out["samples"] = post.samples;
  return out;
}

py::dict divergence(const std::vector<double>& truncations, const std::string& noise, std::size_t n,
                    std::uint64_t seed) {
  const LocationModel model{Noise::parse(noise), Focus::identity()};
  const DivergenceCurve c = divergence_demo(model, truncations, MonteCarloOptions{n, seed, 0});
  py::list points;
  for (const auto& p : c.points) {
    py::dict d;
    d["truncation"] = p.truncation;
    d["bayes_risk"] = p.bayes_risk.value;
    d["bayes_stderr"] = p.bayes_risk.stderr;
    d["posterior_risk"] = p.posterior_risk.value;
    d["posterior_stderr"] = p.posterior_risk.stderr;
    points.append(d);
  }
  py::dict out;
  out["curve"] = points;
  out["diverged"] = c.diverged;
  return out;
}

py::dict finite_risk(const std::string& model_json) {
  const FiniteModel model = io::finite_model_from_json(io::json::parse(model_json));
  const DecisionRule rule = optimal_rule(model);
  const RiskReport rep = risk_report(model, rule);
  py::dict out;
  out["bayes_risk"] = from_real(rep.bayes_risk);
  py::dict post, freq, actions;
  for (const auto& e : rep.posterior_risk) post[from_value(e.at)] = from_real(e.value);
  for (const auto& e : rep.frequentist_risk) freq[from_value(e.at)] = from_real(e.value);
  for (std::size_t j = 0; j < rule.size(); ++j) {
    if (rule.at(j)) actions[from_value(model.ys()[j])] = from_real(rule.at(j)->front());
  }
  out["optimal_action"] = actions;
  out["posterior_risk"] = post;
  out["frequentist_risk"] = freq;
  out["discrepancy"] = from_real(decompose(model, rule).discrepancy);
  return out;
}

KalmanBucyModel kalman_model(double f, double c, double g, double d, double s0, double tmax, double dt) {
  KalmanBucyModel m;
  m.drift = f;
  m.signal_noise = c;
  m.obs_gain = g;
  m.obs_noise = d;
  m.s0 = s0;
  m.t_max = tmax;
  m.dt = dt;
  m.validate();
  return m;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::main_entry(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Factorizations, conditional expectations, risks and Kalman-Bucy filtering";
  m.attr("DEFAULT_SEED") = kDefaultSeed;

  py::register_exception<NotMeasurable>(m, "NotMeasurable");
  py::register_exception<NonSigmaFinite>(m, "NonSigmaFinite");
  py::register_exception<DegenerateBasis>(m, "DegenerateBasis");
  py::register_exception<ImproperPriorNeedsTruncation>(m, "ImproperPriorNeedsTruncation");
  py::register_exception<UndefinedFiber>(m, "UndefinedFiber");
  py::register_exception<StepTooLarge>(m, "StepTooLarge");
  py::register_exception<io::SchemaError>(m, "SchemaError");

  m.def("factorize", &factorize, py::arg("atoms"), py::arg("weights"), py::arg("x"), py::arg("y"),
        "Decide whether X = phi(Y) and return phi on the image or a witness pair.");
  m.def("condexp", &condexp, py::arg("atoms"), py::arg("weights"), py::arg("gamma"), py::arg("y"),
        "Exact E(gamma | y) as (y, phi, mass) rows; phi is None on zero-mass fibers.");
  m.def("project", &project, py::arg("ys"), py::arg("gammas"), py::arg("basis_json"), py::arg("ridge") = py::none(),
        py::arg("min_norm") = false);
  m.def("fiducial", &fiducial, py::arg("y"), py::arg("noise") = "normal", py::arg("psi") = "identity",
        py::arg("n") = 100000, py::arg("seed") = kDefaultSeed);
  m.def("divergence", &divergence, py::arg("truncations"), py::arg("noise") = "normal", py::arg("n") = 100000,
        py::arg("seed") = kDefaultSeed);
  m.def("finite_risk", &finite_risk, py::arg("model_json"),
        "Risks of the posterior-mean rule on a finite model given as JSON.");
  m.def(
      "riccati",
      [](double f, double c, double g, double d, double s0, double tmax, double dt) {
        const RiccatiSolution s = solve_riccati(kalman_model(f, c, g, d, s0, tmax, dt));
        return py::make_tuple(s.times, s.variance);
      },
      py::arg("f") = 0.0, py::arg("c") = 1.0, py::arg("g") = 1.0, py::arg("d") = 1.0, py::arg("s0") = 0.0,
      py::arg("tmax") = 2.0, py::arg("dt") = 1e-3);
  m.def(
      "kalman_mse",
      [](std::size_t paths, std::uint64_t seed, double gain_scale, double f, double c, double g, double d,
         double s0, double tmax, double dt) {
        const MseCurve curve = ensemble_mse(kalman_model(f, c, g, d, s0, tmax, dt), paths, seed, 0, gain_scale);
        py::dict out;
        out["t"] = curve.times;
        out["S"] = curve.riccati;
        out["mse"] = curve.mse;
        out["stderr"] = curve.stderr;
        return out;
      },
      py::arg("paths") = 10000, py::arg("seed") = kDefaultSeed, py::arg("gain_scale") = 1.0, py::arg("f") = 0.0,
      py::arg("c") = 1.0, py::arg("g") = 1.0, py::arg("d") = 1.0, py::arg("s0") = 0.0, py::arg("tmax") = 2.0,
      py::arg("dt") = 1e-3);
  m.def("cli", &run_cli, py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
