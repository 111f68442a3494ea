#include "doobdynkin/risk.hpp"

#include "doobdynkin/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace doob {

namespace {

constexpr std::size_t kChunk = 4096;

void require_proper(const FiniteModel& model) {
  if (!model.proper()) {
    throw ImproperPriorNeedsTruncation(
        "the prior has infinite mass; exact risk integrals need a truncation sequence");
  }
}

std::size_t require_y(const FiniteModel& model, const Value& y) {
  auto j = model.y_index(y);
  if (!j) throw std::invalid_argument("y = " + y.to_string() + " is not a value of the model");
  return *j;
}

const ExtendedReal& require_fiber(const std::vector<ExtendedReal>& marginal, std::size_t j,
                                  const Value& y) {
  const ExtendedReal& m = marginal[j];
  if (m.is_zero()) throw UndefinedFiber("Y = " + y.to_string() + " has zero marginal mass");
  if (m.is_infinite()) {
    throw NonSigmaFinite("Y = " + y.to_string() + " has infinite marginal mass");
  }
  return m;
}

const Action& require_action(const DecisionRule& rule, std::size_t j, const FiniteModel& model) {
  if (j >= rule.size()) throw std::invalid_argument("decision rule does not match the model");
  if (!rule.at(j)) {
    throw UndefinedFiber("decision rule is undefined at Y = " + model.ys()[j].to_string());
  }
  if (rule.at(j)->size() != model.dimension()) {
    throw std::invalid_argument("action dimension differs from the focus dimension");
  }
  return *rule.at(j);
}

/// Moments of f over `samples` draws, chunk c drawn from Stream(seed, c).
Moments sample_moments(std::size_t samples, std::uint64_t seed, unsigned threads,
                       const std::function<double(Stream&)>& draw) {
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Moments> partial(chunks);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    Stream stream(seed, c);
    const std::size_t end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) partial[c].add(draw(stream));
  });
  Moments total;
  for (const auto& m : partial) total.merge(m);
  return total;
}

McEstimate scaled(const Moments& m, double scale) {
  return {scale * m.mean, scale * m.stderr_of_mean(), static_cast<std::size_t>(m.count)};
}

void require_finite_mass(const ContinuousModel& model) {
  if (!std::isfinite(model.prior_mass)) {
    throw ImproperPriorNeedsTruncation("prior mass is infinite; use truncated_risk_curve");
  }
}

}  // namespace

ExtendedReal squared_loss(const Action& a, const Action& b) {
  if (a.size() != b.size()) throw std::invalid_argument("actions of different dimension");
  ExtendedReal total(0);
  for (std::size_t i = 0; i < a.size(); ++i) total += square(a[i] - b[i]);
  return total;
}

FiniteModel::FiniteModel(std::vector<Value> thetas, std::vector<ExtendedReal> prior, std::vector<Value> ys,
                         std::vector<std::vector<ExtendedReal>> likelihood, std::vector<Action> focus)
    : thetas_(std::move(thetas)),
      prior_(std::move(prior)),
      ys_(std::move(ys)),
      likelihood_(std::move(likelihood)),
      focus_(std::move(focus)) {
  if (thetas_.empty()) throw std::invalid_argument("model has no parameter values");
  if (prior_.size() != thetas_.size() || likelihood_.size() != thetas_.size() ||
      focus_.size() != thetas_.size()) {
    throw std::invalid_argument("prior, likelihood and focus must have one entry per theta");
  }
  if (std::set<Value>(thetas_.begin(), thetas_.end()).size() != thetas_.size()) {
    throw std::invalid_argument("theta values are not distinct");
  }
  if (std::set<Value>(ys_.begin(), ys_.end()).size() != ys_.size()) {
    throw std::invalid_argument("y values are not distinct");
  }
  const std::size_t dim = focus_.front().size();
  if (dim == 0) throw std::invalid_argument("focus values must have at least one coordinate");
  for (std::size_t t = 0; t < thetas_.size(); ++t) {
    const std::string who = "theta = " + thetas_[t].to_string();
    if (prior_[t].sign() < 0) throw std::invalid_argument("negative prior weight at " + who);
    if (focus_[t].size() != dim) throw std::invalid_argument("focus dimension varies at " + who);
    for (const auto& g : focus_[t]) {
      if (g.is_infinite()) throw std::invalid_argument("infinite focus value at " + who);
    }
    if (likelihood_[t].size() != ys_.size()) {
      throw std::invalid_argument("likelihood row length differs from the y list at " + who);
    }
    ExtendedReal row(0);
    bool exact = true;
    for (const auto& p : likelihood_[t]) {
      if (p.sign() < 0 || p.is_infinite()) {
        throw std::invalid_argument("likelihood entries must be finite and non-negative at " + who);
      }
      exact = exact && p.is_exact();
      row += p;
    }
    const bool sums_to_one = exact ? row == ExtendedReal(1) : std::abs(row.to_double() - 1.0) <= 1e-9;
    if (!sums_to_one) {
      throw std::invalid_argument("likelihood row sums to " + row.to_string() + " at " + who);
    }
  }
}

bool FiniteModel::proper() const {
  return std::none_of(prior_.begin(), prior_.end(), [](const ExtendedReal& w) { return w.is_infinite(); });
}

std::optional<std::size_t> FiniteModel::theta_index(const Value& theta) const {
  auto it = std::find(thetas_.begin(), thetas_.end(), theta);
  if (it == thetas_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - thetas_.begin());
}

std::optional<std::size_t> FiniteModel::y_index(const Value& y) const {
  auto it = std::find(ys_.begin(), ys_.end(), y);
  if (it == ys_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ys_.begin());
}

std::vector<ExtendedReal> FiniteModel::marginal() const {
  std::vector<ExtendedReal> m(ys_.size(), ExtendedReal(0));
  for (std::size_t t = 0; t < thetas_.size(); ++t) {
    for (std::size_t j = 0; j < ys_.size(); ++j) m[j] += prior_[t] * likelihood_[t][j];
  }
  return m;
}

JointSpace joint_space(const FiniteModel& model) {
  std::vector<std::string> atoms;
  std::vector<ExtendedReal> weights;
  std::vector<std::size_t> theta_of;
  std::vector<std::size_t> y_of;
  for (std::size_t t = 0; t < model.theta_count(); ++t) {
    for (std::size_t j = 0; j < model.y_count(); ++j) {
      atoms.push_back("theta" + std::to_string(t) + "/y" + std::to_string(j));
      weights.push_back(model.prior(t) * model.likelihood(t, j));
      theta_of.push_back(t);
      y_of.push_back(j);
    }
  }
  SpacePtr space = make_space(std::move(atoms), std::move(weights));
  RandomMap theta(space, std::vector<Value>(model.thetas().begin(), model.thetas().end()), theta_of);
  RandomMap y(space, std::vector<Value>(model.ys().begin(), model.ys().end()), y_of);
  std::vector<RandomMap> focus;
  for (std::size_t d = 0; d < model.dimension(); ++d) {
    std::vector<Value> coord;
    coord.reserve(theta_of.size());
    for (std::size_t t : theta_of) coord.emplace_back(model.focus(t)[d]);
    focus.push_back(RandomMap::from_values(space, std::move(coord)));
  }
  return {space, std::move(theta), std::move(y), std::move(focus)};
}

DecisionRule rule_from_factor(const FiniteModel& model, const FactorMap& phi) {
  std::vector<std::optional<Action>> per_y;
  for (const auto& y : model.ys()) {
    auto v = phi(y);
    if (!v) {
      per_y.emplace_back(std::nullopt);
      continue;
    }
    if (model.dimension() != 1) throw std::invalid_argument("factor maps give scalar actions only");
    per_y.emplace_back(Action{v->number()});
  }
  return DecisionRule(std::move(per_y));
}

DecisionRule rule_from_fit(const FiniteModel& model, const ProjectionFit& fit, const FeatureBasis& basis) {
  if (model.dimension() != 1) throw std::invalid_argument("projection fits give scalar actions only");
  std::vector<std::optional<Action>> per_y;
  for (const auto& y : model.ys()) {
    per_y.emplace_back(Action{ExtendedReal(evaluate_fit(fit, basis, y.number().to_double()))});
  }
  return DecisionRule(std::move(per_y));
}

DecisionRule constant_rule(const FiniteModel& model, const Action& a) {
  if (a.size() != model.dimension()) throw std::invalid_argument("action dimension mismatch");
  return DecisionRule(std::vector<std::optional<Action>>(model.y_count(), a));
}

DecisionRule optimal_rule(const FiniteModel& model) {
  const auto marginal = model.marginal();
  std::vector<std::optional<Action>> per_y;
  for (std::size_t j = 0; j < model.y_count(); ++j) {
    if (marginal[j].is_zero() || marginal[j].is_infinite()) {
      per_y.emplace_back(std::nullopt);
    } else {
      per_y.emplace_back(optimal_action(model, model.ys()[j]));
    }
  }
  return DecisionRule(std::move(per_y));
}

ExtendedReal bayes_risk(const FiniteModel& model, const DecisionRule& rule) {
  require_proper(model);
  ExtendedReal r(0);
  for (std::size_t t = 0; t < model.theta_count(); ++t) {
    for (std::size_t j = 0; j < model.y_count(); ++j) {
      const ExtendedReal joint = model.prior(t) * model.likelihood(t, j);
      if (joint.is_zero()) continue;
      r += joint * squared_loss(model.focus(t), require_action(rule, j, model));
    }
  }
  return r;
}

ExtendedReal posterior_risk(const FiniteModel& model, const DecisionRule& rule, const Value& y) {
  const std::size_t j = require_y(model, y);
  const auto marginal = model.marginal();
  const ExtendedReal& m = require_fiber(marginal, j, y);
  const Action& a = require_action(rule, j, model);
  ExtendedReal total(0);
  for (std::size_t t = 0; t < model.theta_count(); ++t) {
    const ExtendedReal joint = model.prior(t) * model.likelihood(t, j);
    if (joint.is_zero()) continue;
    total += joint * squared_loss(model.focus(t), a);
  }
  return total / m;
}

Action optimal_action(const FiniteModel& model, const Value& y) {
  const std::size_t j = require_y(model, y);
  const auto marginal = model.marginal();
  const ExtendedReal& m = require_fiber(marginal, j, y);
  Action mean(model.dimension(), ExtendedReal(0));
  for (std::size_t t = 0; t < model.theta_count(); ++t) {
    const ExtendedReal joint = model.prior(t) * model.likelihood(t, j);
    if (joint.is_zero()) continue;
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += joint * model.focus(t)[d];
  }
  for (auto& c : mean) c /= m;
  return mean;
}

ExtendedReal frequentist_risk(const FiniteModel& model, const DecisionRule& rule, const Value& theta) {
  auto t = model.theta_index(theta);
  if (!t) throw std::invalid_argument("theta = " + theta.to_string() + " is not a model parameter");
  if (model.prior(*t).is_zero()) {
    throw std::invalid_argument("theta = " + theta.to_string() + " is outside the prior support");
  }
  ExtendedReal r(0);
  for (std::size_t j = 0; j < model.y_count(); ++j) {
    const ExtendedReal& p = model.likelihood(*t, j);
    if (p.is_zero()) continue;
    r += p * squared_loss(require_action(rule, j, model), model.focus(*t));
  }
  return r;
}

ExtendedReal integrate_frequentist(const FiniteModel& model, const DecisionRule& rule) {
  require_proper(model);
  ExtendedReal r(0);
  for (std::size_t t = 0; t < model.theta_count(); ++t) {
    if (model.prior(t).is_zero()) continue;
    r += model.prior(t) * frequentist_risk(model, rule, model.thetas()[t]);
  }
  return r;
}

Decomposition decompose(const FiniteModel& model, const DecisionRule& rule) {
  Decomposition out{bayes_risk(model, rule), ExtendedReal(0), ExtendedReal(0)};
  const auto marginal = model.marginal();
  for (std::size_t j = 0; j < model.y_count(); ++j) {
    if (marginal[j].is_zero()) continue;
    out.integrated_posterior_risk += marginal[j] * posterior_risk(model, rule, model.ys()[j]);
  }
  out.discrepancy = abs(out.bayes_risk - out.integrated_posterior_risk);
  return out;
}

RiskReport risk_report(const FiniteModel& model, const DecisionRule& rule) {
  RiskReport report;
  report.bayes_risk = bayes_risk(model, rule);
  const auto marginal = model.marginal();
  for (std::size_t j = 0; j < model.y_count(); ++j) {
    if (marginal[j].is_zero()) continue;
    report.posterior_risk.push_back({model.ys()[j], posterior_risk(model, rule, model.ys()[j]), {}});
  }
  for (std::size_t t = 0; t < model.theta_count(); ++t) {
    if (model.prior(t).is_zero()) continue;
    report.frequentist_risk.push_back(
        {model.thetas()[t], frequentist_risk(model, rule, model.thetas()[t]), {}});
  }
  return report;
}

McEstimate bayes_risk_mc(const ContinuousModel& model, const ScalarRule& rule,
                         const MonteCarloOptions& options) {
  require_finite_mass(model);
  const Moments m = sample_moments(options.samples, options.seed, options.threads, [&](Stream& s) {
    const double theta = model.sample_theta(s);
    const double y = model.sample_y(theta, s);
    const double e = model.focus(theta) - rule(y);
    return e * e;
  });
  return scaled(m, model.prior_mass);
}

McEstimate frequentist_risk_mc(const ContinuousModel& model, const ScalarRule& rule, double theta,
                               const MonteCarloOptions& options) {
  const double target = model.focus(theta);
  const Moments m = sample_moments(options.samples, options.seed, options.threads, [&](Stream& s) {
    const double e = rule(model.sample_y(theta, s)) - target;
    return e * e;
  });
  return scaled(m, 1.0);
}

McEstimate integrated_posterior_risk_mc(const ContinuousModel& model, const ScalarRule& rule,
                                        const MonteCarloOptions& options) {
  require_finite_mass(model);
  if (!model.posterior_moments) throw std::invalid_argument("model has no posterior moments");
  const Moments m = sample_moments(options.samples, options.seed, options.threads, [&](Stream& s) {
    const double y = model.sample_y(model.sample_theta(s), s);
    const auto [mean, var] = model.posterior_moments(y);
    const double bias = mean - rule(y);
    return var + bias * bias;
  });
  return scaled(m, model.prior_mass);
}

McEstimate integrate_frequentist_mc(const ContinuousModel& model, const ScalarRule& rule,
                                    const PriorQuadrature& prior, const MonteCarloOptions& options) {
  if (prior.nodes.size() != prior.weights.size()) throw std::invalid_argument("quadrature size mismatch");
  McEstimate out;
  double var = 0.0;
  for (std::size_t k = 0; k < prior.nodes.size(); ++k) {
    MonteCarloOptions node = options;
    node.seed = derive_seed(options.seed, k);
    const McEstimate r = frequentist_risk_mc(model, rule, prior.nodes[k], node);
    out.value += prior.weights[k] * r.value;
    var += prior.weights[k] * prior.weights[k] * r.stderr * r.stderr;
    out.samples += r.samples;
  }
  out.stderr = std::sqrt(var);
  return out;
}

McDecomposition decompose_mc(const ContinuousModel& model, const ScalarRule& rule,
                             const MonteCarloOptions& options) {
  MonteCarloOptions first = options;
  MonteCarloOptions second = options;
  first.seed = derive_seed(options.seed, 1);
  second.seed = derive_seed(options.seed, 2);
  McDecomposition out;
  out.bayes_risk = bayes_risk_mc(model, rule, first);
  out.integrated_posterior_risk = integrated_posterior_risk_mc(model, rule, second);
  out.discrepancy = std::abs(out.bayes_risk.value - out.integrated_posterior_risk.value);
  out.combined_stderr = std::hypot(out.bayes_risk.stderr, out.integrated_posterior_risk.stderr);
  return out;
}

bool cauchy_diverged(std::span<const double> risks, double tolerance) {
  if (risks.size() < 2) return false;
  const std::size_t first = risks.size() >= 3 ? risks.size() - 3 : 0;
  for (std::size_t i = first; i + 1 < risks.size(); ++i) {
    const double a = risks[i];
    const double b = risks[i + 1];
    if (!std::isfinite(a) || !std::isfinite(b)) return true;
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) continue;
    if (std::abs(b - a) / scale > tolerance) return true;
  }
  return false;
}

TruncationCurve truncated_risk_curve(const std::function<ContinuousModel(double)>& truncate,
                                     const ScalarRule& rule, std::span<const double> truncations,
                                     const MonteCarloOptions& options) {
  for (std::size_t i = 0; i < truncations.size(); ++i) {
    if (!(truncations[i] > 0) || (i > 0 && !(truncations[i] > truncations[i - 1]))) {
      throw std::invalid_argument("truncations must be positive and strictly increasing");
    }
  }
  TruncationCurve curve;
  std::vector<double> values;
  for (std::size_t i = 0; i < truncations.size(); ++i) {
    MonteCarloOptions run = options;
    run.seed = derive_seed(options.seed, i);
    const McEstimate r = bayes_risk_mc(truncate(truncations[i]), rule, run);
    curve.points.push_back({truncations[i], r});
    values.push_back(r.value);
  }
  curve.diverged = cauchy_diverged(values);
  return curve;
}

}  // namespace doob
