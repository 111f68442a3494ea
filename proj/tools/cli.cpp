#include "cli.hpp"

#include "doobdynkin/condexp.hpp"
#include "doobdynkin/factorization.hpp"
#include "doobdynkin/fiducial.hpp"
#include "doobdynkin/io.hpp"
#include "doobdynkin/kalman_bucy.hpp"
#include "doobdynkin/parallel.hpp"
#include "doobdynkin/risk.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <iostream>
#include <sstream>

namespace doob::cli {

namespace {

using io::json;

const std::vector<double> kDefaultTruncations{1.0, 10.0, 100.0};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

void emit(const RunConfig& config, const std::string& content, std::ostream& out) {
  if (config.out) {
    io::write_atomic(*config.out, content);
  } else {
    out << content;
  }
}

json estimate_json(double value, double stderr) {
  json j;
  j["value"] = value;
  j["stderr"] = stderr;
  return j;
}

// ---- factorize -------------------------------------------------------------

int run_factorize(const RunConfig& config, std::ostream& out) {
  const auto file = io::space_from_json(io::read_json_file(config.space));
  const RandomMap& x = file.map(config.x);
  const RandomMap& y = file.map(config.y);
  json report;
  report["schema"] = "doobdynkin.factorize/1";
  report["x"] = config.x;
  report["y"] = config.y;
  try {
    FactorMap phi = construct_factor(x, y);
    if (config.extend) {
      const Value fallback = parse_value(*config.extend);
      phi = extend_factor(phi, y.codomain(), fallback);
    }
    report["status"] = "measurable";
    report["provenance"] = std::string(to_string(phi.provenance()));
    report["defined_on_image_only"] = phi.defined_on_image_only();
    json table = json::array();
    for (std::size_t k = 0; k < phi.domain().size(); ++k) {
      json row;
      row["y"] = io::to_json(phi.domain()[k]);
      row["phi"] = io::to_json(phi.assignment()[k]);
      table.push_back(row);
    }
    report["phi"] = table;
  } catch (const NotMeasurable& e) {
    const auto [a, b] = e.report().witness.value();
    report["status"] = "not_measurable";
    report["witness"] = {x.domain().atom(a), x.domain().atom(b)};
    json detail;
    detail["y"] = io::to_json(y.at(a));
    detail["x"] = {io::to_json(x.at(a)), io::to_json(x.at(b))};
    report["witness_values"] = detail;
  }
  emit(config, io::dump(report), out);
  return kExitOk;
}

// ---- condexp ---------------------------------------------------------------

int run_condexp(const RunConfig& config, std::ostream& out) {
  const auto file = io::space_from_json(io::read_json_file(config.space));
  if (file.witness) {
    const auto verdict = is_sigma_finite(*file.space, *file.witness);
    if (!verdict.sigma_finite) throw NonSigmaFinite(verdict.diagnostic);
  }
  const auto table = condexp_discrete(*file.space, file.map(config.gamma), file.map(config.y));
  std::ostringstream csv;
  csv << "y,phi,mass\n";
  for (const auto& e : table.entries) {
    csv << csv_field(e.y.to_string()) << ',' << e.phi.to_string() << ',' << e.mass.to_string() << '\n';
  }
  for (const auto& y : table.undefined) csv << csv_field(y.to_string()) << ",undefined,0\n";
  emit(config, csv.str(), out);
  return kExitOk;
}

// ---- project ---------------------------------------------------------------

int run_project(const RunConfig& config, std::ostream& out) {
  const auto samples = io::read_samples_csv(config.samples);
  const json basis_spec = io::read_json_file(config.basis);
  const FeatureBasis basis = io::basis_from_json(basis_spec);
  ProjectionOptions options;
  options.ridge = config.ridge;
  options.min_norm_fallback = config.min_norm;
  options.threads = config.threads;
  const ProjectionFit fit = project_l2(samples, basis, options);
  json report = io::fit_to_json(fit, basis, basis_spec);
  const auto corr = residual_correlations(samples, basis, fit.coefficients, config.threads);
  double worst = 0.0;
  for (double v : corr) worst = std::max(worst, std::abs(v));
  report["max_residual_correlation"] = worst;
  emit(config, io::dump(report), out);
  return kExitOk;
}

// ---- risk ------------------------------------------------------------------

Action action_from_json(const json& j, const std::string& field) {
  Action a;
  if (j.is_array()) {
    for (std::size_t d = 0; d < j.size(); ++d) {
      a.push_back(io::real_from_json(j[d], field + "[" + std::to_string(d) + "]"));
    }
  } else {
    a.push_back(io::real_from_json(j, field));
  }
  return a;
}

std::string phi_kind(const json& phi) {
  if (phi.contains("kind") && phi.at("kind").is_string()) return phi.at("kind").get<std::string>();
  if (phi.contains("schema") && phi.at("schema") == "doobdynkin.fit/1") return "fit";
  throw io::SchemaError("phi.kind", "missing");
}

std::pair<FeatureBasis, ProjectionFit> fit_from_json(const json& phi) {
  if (!phi.contains("basis")) throw io::SchemaError("phi.basis", "missing");
  if (!phi.contains("coefficients") || !phi.at("coefficients").is_array()) {
    throw io::SchemaError("phi.coefficients", "expected an array");
  }
  FeatureBasis basis = io::basis_from_json(phi.at("basis"));
  ProjectionFit fit;
  fit.coefficients = phi.at("coefficients").get<std::vector<double>>();
  if (fit.coefficients.size() != basis.size()) {
    throw io::SchemaError("phi.coefficients", "length differs from the basis");
  }
  return {std::move(basis), std::move(fit)};
}

DecisionRule finite_rule(const FiniteModel& model, const json& phi) {
  const std::string kind = phi_kind(phi);
  if (kind == "optimal") return optimal_rule(model);
  if (kind == "constant") {
    if (!phi.contains("value")) throw io::SchemaError("phi.value", "missing");
    return constant_rule(model, action_from_json(phi.at("value"), "phi.value"));
  }
  if (kind == "table") {
    if (!phi.contains("y") || !phi.contains("phi") || !phi.at("y").is_array() ||
        !phi.at("phi").is_array() || phi.at("y").size() != phi.at("phi").size()) {
      throw io::SchemaError("phi", "a table needs aligned arrays 'y' and 'phi'");
    }
    std::vector<std::optional<Action>> per_y(model.y_count());
    for (std::size_t k = 0; k < phi.at("y").size(); ++k) {
      const std::string field = "phi.y[" + std::to_string(k) + "]";
      const Value y = io::value_from_json(phi.at("y")[k], field);
      auto j = model.y_index(y);
      if (!j) throw io::SchemaError(field, "not a value of the model");
      per_y[*j] = action_from_json(phi.at("phi")[k], "phi.phi[" + std::to_string(k) + "]");
    }
    return DecisionRule(std::move(per_y));
  }
  if (kind == "affine") {
    const ExtendedReal intercept = io::real_from_json(phi.value("intercept", json(0)), "phi.intercept");
    const ExtendedReal slope = io::real_from_json(phi.value("slope", json(0)), "phi.slope");
    std::vector<std::optional<Action>> per_y;
    for (const Value& y : model.ys()) {
      if (!y.is_number()) throw io::SchemaError("phi", "affine rules need numeric y values");
      per_y.push_back(Action{intercept + slope * y.number()});
    }
    return DecisionRule(std::move(per_y));
  }
  if (kind == "fit") {
    const auto [basis, fit] = fit_from_json(phi);
    return rule_from_fit(model, fit, basis);
  }
  throw io::SchemaError("phi.kind", "unknown kind '" + kind + "'");
}

ScalarRule location_rule(const LocationModel& model, const json& phi) {
  const std::string kind = phi_kind(phi);
  if (kind == "optimal") return optimal_location_rule(model);
  if (kind == "constant") {
    const double c = io::real_from_json(phi.at("value"), "phi.value").to_double();
    return [c](double) { return c; };
  }
  if (kind == "affine") {
    const double a = io::real_from_json(phi.value("intercept", json(0)), "phi.intercept").to_double();
    const double b = io::real_from_json(phi.value("slope", json(0)), "phi.slope").to_double();
    return [a, b](double y) { return a + b * y; };
  }
  if (kind == "fit") {
    auto [basis, fit] = fit_from_json(phi);
    return [basis = std::move(basis), fit = std::move(fit)](double y) { return evaluate_fit(fit, basis, y); };
  }
  throw io::SchemaError("phi.kind", "kind '" + kind + "' is not available for location models");
}

json risk_entry_json(const char* key, const RiskEntry& e) {
  json j;
  j[key] = io::to_json(e.at);
  j["value"] = io::to_json(e.value);
  return j;
}

json finite_risk(const RunConfig& config, const json& model_j, const json& phi_j) {
  if (!config.truncations.empty()) {
    throw io::SchemaError("truncations", "only location models take a truncation sequence");
  }
  const FiniteModel model = io::finite_model_from_json(model_j);
  const DecisionRule rule = finite_rule(model, phi_j);
  const RiskReport report = risk_report(model, rule);
  const Decomposition dec = decompose(model, rule);
  json out;
  out["schema"] = "doobdynkin.risk/1";
  out["model"] = "finite";
  out["bayes_risk"] = io::to_json(report.bayes_risk);
  out["bayes_stderr"] = nullptr;
  json post = json::array();
  for (const auto& e : report.posterior_risk) post.push_back(risk_entry_json("y", e));
  out["posterior_risk"] = post;
  json freq = json::array();
  for (const auto& e : report.frequentist_risk) freq.push_back(risk_entry_json("theta", e));
  out["frequentist_risk"] = freq;
  json d;
  d["bayes_risk"] = io::to_json(dec.bayes_risk);
  d["integrated_posterior_risk"] = io::to_json(dec.integrated_posterior_risk);
  d["discrepancy"] = io::to_json(dec.discrepancy);
  out["decomposition"] = d;
  out["curve"] = json::array();
  out["diverged"] = false;
  return out;
}

json location_risk(const RunConfig& config, const json& model_j, const json& phi_j) {
  LocationModel model;
  if (!model_j.contains("noise") || !model_j.at("noise").is_string()) {
    throw io::SchemaError("model.noise", "expected a noise family name");
  }
  try {
    model.noise = Noise::parse(model_j.at("noise").get<std::string>());
    model.psi = Focus::parse(model_j.value("psi", std::string("identity")));
  } catch (const std::invalid_argument& e) {
    throw io::SchemaError("model", e.what());
  }
  validate(model);
  const ScalarRule rule = location_rule(model, phi_j);
  const std::vector<double>& truncations = config.truncations.empty() ? kDefaultTruncations : config.truncations;
  MonteCarloOptions options{config.mc_samples, config.seed, config.threads};

  const TruncationCurve curve = truncated_risk_curve(
      [&](double t) { return truncated_location_model(model, t); }, rule, truncations, options);

  json out;
  out["schema"] = "doobdynkin.risk/1";
  out["model"] = "location";
  out["noise"] = std::string(model.noise.name());
  out["psi"] = model.psi.name();
  out["samples"] = config.mc_samples;
  const auto& last = curve.points.back().risk;
  if (curve.diverged) {
    out["bayes_risk"] = "inf";
    out["bayes_stderr"] = nullptr;
  } else {
    out["bayes_risk"] = last.value;
    out["bayes_stderr"] = last.stderr;
  }

  // Posterior risk under the Lebesgue prior at y = 0 and y = T_k.
  std::vector<double> points{0.0};
  points.insert(points.end(), truncations.begin(), truncations.end());
  json post = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double y = points[i];
    const auto fp = fiducial_posterior(model, y, config.mc_samples, derive_seed(config.seed, 2000 + i),
                                       config.threads);
    const double action = rule(y);
    Moments m;
    for (double theta : fp.samples) {
      const double e = model.psi(theta) - action;
      m.add(e * e);
    }
    json row;
    row["y"] = y;
    row["value"] = m.mean;
    row["stderr"] = m.stderr_of_mean();
    post.push_back(row);
  }
  out["posterior_risk"] = post;

  json freq = json::array();
  const ContinuousModel sampler = truncated_location_model(model, truncations.back());
  for (std::size_t i = 0; i < points.size(); ++i) {
    MonteCarloOptions o = options;
    o.seed = derive_seed(config.seed, 3000 + i);
    const McEstimate r = frequentist_risk_mc(sampler, rule, points[i], o);
    json row;
    row["theta"] = points[i];
    row["value"] = r.value;
    row["stderr"] = r.stderr;
    freq.push_back(row);
  }
  out["frequentist_risk"] = freq;

  json c = json::array();
  for (const auto& p : curve.points) {
    json row;
    row["truncation"] = p.truncation;
    row["bayes_risk"] = p.risk.value;
    row["stderr"] = p.risk.stderr;
    c.push_back(row);
  }
  out["curve"] = c;
  out["diverged"] = curve.diverged;
  return out;
}

int run_risk(const RunConfig& config, std::ostream& out) {
  const json model_j = io::read_json_file(config.model);
  const json phi_j = io::read_json_file(config.phi);
  const std::string kind = model_j.value("kind", std::string("finite"));
  json report;
  if (kind == "finite") {
    report = finite_risk(config, model_j, phi_j);
  } else if (kind == "location") {
    report = location_risk(config, model_j, phi_j);
  } else {
    throw io::SchemaError("model.kind", "unknown kind '" + kind + "'");
  }
  emit(config, io::dump(report), out);
  return kExitOk;
}

// ---- fiducial-demo ---------------------------------------------------------

int run_fiducial(const RunConfig& config, std::ostream& out) {
  LocationModel model;
  model.noise = Noise::parse(config.noise);
  model.psi = Focus::parse(config.psi);
  validate(model);
  const auto post = fiducial_posterior(model, config.y_obs, config.mc_samples, config.seed, config.threads);
  const Estimate exact = posterior_point_estimate(post, model.psi, Route::closed_form);
  const Estimate mc = posterior_point_estimate(post, model.psi, Route::samples);
  const Estimate risk_exact = posterior_risk_location(post, model.psi, Route::closed_form);
  const Estimate risk_mc = posterior_risk_location(post, model.psi, Route::samples);
  const std::vector<double>& truncations = config.truncations.empty() ? kDefaultTruncations : config.truncations;
  const DivergenceCurve curve = divergence_demo(
      model, truncations, MonteCarloOptions{config.mc_samples, derive_seed(config.seed, 1), config.threads});

  json report;
  report["schema"] = "doobdynkin.fiducial/1";
  report["y"] = config.y_obs;
  report["noise"] = std::string(model.noise.name());
  report["psi"] = model.psi.name();
  report["n"] = config.mc_samples;
  report["seed"] = config.seed;
  report["estimate"] = exact.value;
  report["estimate_mc"] = estimate_json(mc.value, mc.stderr);
  report["posterior_risk"] = risk_exact.value;
  report["posterior_risk_mc"] = estimate_json(risk_mc.value, risk_mc.stderr);
  json c = json::array();
  for (const auto& p : curve.points) {
    json row;
    row["truncation"] = p.truncation;
    row["bayes_risk"] = p.bayes_risk.value;
    row["bayes_stderr"] = p.bayes_risk.stderr;
    row["posterior_risk"] = p.posterior_risk.value;
    row["posterior_stderr"] = p.posterior_risk.stderr;
    c.push_back(row);
  }
  report["curve"] = c;
  report["diverged"] = curve.diverged;
  emit(config, io::dump(report), out);
  return kExitOk;
}

// ---- kalman-demo -----------------------------------------------------------

int run_kalman(const RunConfig& config, std::ostream& out) {
  KalmanBucyModel model;
  model.drift = config.f;
  model.signal_noise = config.c;
  model.obs_gain = config.g;
  model.obs_noise = config.d;
  model.s0 = config.s0;
  model.x0_mean = config.x0;
  model.t_max = config.tmax;
  model.dt = config.dt;
  model.validate();
  const MseCurve curve = ensemble_mse(model, config.paths, config.seed, config.threads, config.gain_scale);
  std::ostringstream csv;
  csv << "t,S,mse,stderr\n";
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    csv << format_double(curve.times[k]) << ',' << format_double(curve.riccati[k]) << ','
        << format_double(curve.mse[k]) << ',' << format_double(curve.stderr[k]) << '\n';
  }
  emit(config, csv.str(), out);
  return kExitOk;
}

}  // namespace

std::uint64_t parse_seed(const std::string& text) {
  std::string_view s = text;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("seed must be an unsigned 64-bit integer, got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_truncations(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument("truncation '" + item + "' is not a number");
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("truncations must be positive and finite");
    if (!out.empty() && !(v > out.back())) throw std::invalid_argument("truncations must be strictly increasing");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

ParseOutcome parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Factorizations, conditional expectations and risks on finite and location models",
               "doobdynkin"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string seed_text;
  std::string out_path;
  std::string truncations_text;
  app.add_option("--seed", seed_text, "64-bit seed, decimal or 0x-hex (default 0xD00BD00B)");
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--threads", cfg.threads, "Worker threads (0 = hardware concurrency)");

  auto* factorize = app.add_subcommand("factorize", "Decide and construct phi with X = phi(Y)");
  factorize->add_option("--space", cfg.space, "Space file (JSON)")->required();
  factorize->add_option("--x", cfg.x, "Name of the map X")->required();
  factorize->add_option("--y", cfg.y, "Name of the map Y")->required();
  factorize->add_option("--extend", cfg.extend, "Extend phi to the full Y codomain with this default");

  auto* condexp = app.add_subcommand("condexp", "Exact E(Gamma | Y) on a finite space (CSV y,phi,mass)");
  condexp->add_option("--space", cfg.space, "Space file (JSON)")->required();
  condexp->add_option("--gamma", cfg.gamma, "Name of the integrand map")->required();
  condexp->add_option("--y", cfg.y, "Name of the conditioning map")->required();

  auto* project = app.add_subcommand("project", "Least-squares projection of samples onto a basis");
  project->add_option("--samples", cfg.samples, "CSV with header y,gamma")->required();
  project->add_option("--basis", cfg.basis, "Basis specification (JSON)")->required();
  project->add_option("--ridge", cfg.ridge, "Ridge penalty (default scales with the normal matrix)")
      ->check(CLI::NonNegativeNumber);
  project->add_flag("--min-norm", cfg.min_norm, "With --ridge 0, return the minimal-norm solution");

  auto* risk = app.add_subcommand("risk", "Bayes, posterior and frequentist risks of a decision rule");
  risk->add_option("--model", cfg.model, "Model file (JSON)")->required();
  risk->add_option("--phi", cfg.phi, "Decision rule (JSON)")->required();
  risk->add_option("--report", out_path, "Report path (same as --out)");
  risk->add_option("--truncations", truncations_text, "Increasing truncations, e.g. 1,10,100");
  risk->add_option("--samples", cfg.mc_samples, "Monte Carlo sample size")->check(CLI::PositiveNumber);

  auto* fiducial = app.add_subcommand("fiducial-demo", "Fiducial posterior of a location model");
  fiducial->add_option("--y", cfg.y_obs, "Observation")->capture_default_str();
  fiducial->add_option("--noise", cfg.noise, "normal, uniform, laplace or degenerate")->capture_default_str();
  fiducial->add_option("--psi", cfg.psi, "identity, square or constant:<c>")->capture_default_str();
  fiducial->add_option("--n", cfg.mc_samples, "Posterior sample size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fiducial->add_option("--truncations", truncations_text, "Prior truncations (default 1,10,100)");

  auto* kalman = app.add_subcommand("kalman-demo", "Kalman-Bucy ensemble MSE against S(t) (CSV t,S,mse,stderr)");
  kalman->add_option("--f", cfg.f, "Signal drift F")->capture_default_str();
  kalman->add_option("--c", cfg.c, "Signal noise C")->capture_default_str();
  kalman->add_option("--g", cfg.g, "Observation gain G")->capture_default_str();
  kalman->add_option("--d", cfg.d, "Observation noise D")->capture_default_str();
  kalman->add_option("--s0", cfg.s0, "Initial variance")->capture_default_str();
  kalman->add_option("--x0", cfg.x0, "Initial mean")->capture_default_str();
  kalman->add_option("--tmax", cfg.tmax, "Horizon")->capture_default_str();
  kalman->add_option("--dt", cfg.dt, "Time step")->capture_default_str();
  kalman->add_option("--paths", cfg.paths, "Number of simulated paths")->capture_default_str();
  kalman->add_option("--gain-scale", cfg.gain_scale, "Multiplier on the optimal gain")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (!seed_text.empty()) cfg.seed = parse_seed(seed_text);
    if (!truncations_text.empty()) cfg.truncations = parse_truncations(truncations_text);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return {std::nullopt, kExitOk};
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return {std::nullopt, kExitOk};
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return {std::nullopt, kExitUsage};
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return {std::nullopt, kExitUsage};
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  if (!out_path.empty()) cfg.out = out_path;
  return {std::move(cfg), kExitOk};
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.subcommand == "factorize") return run_factorize(config, out);
    if (config.subcommand == "condexp") return run_condexp(config, out);
    if (config.subcommand == "project") return run_project(config, out);
    if (config.subcommand == "risk") return run_risk(config, out);
    if (config.subcommand == "fiducial-demo") return run_fiducial(config, out);
    if (config.subcommand == "kalman-demo") return run_kalman(config, out);
    err << "error: unknown subcommand '" << config.subcommand << "'\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const ParseOutcome parsed = parse_args(args, out, err);
  if (!parsed.config) return parsed.exit_code;
  return run(*parsed.config, out, err);
}

}  // namespace doob::cli
