#pragma once

#include "doobdynkin/condexp.hpp"
#include "doobdynkin/errors.hpp"
#include "doobdynkin/factorization.hpp"
#include "doobdynkin/measure.hpp"
#include "doobdynkin/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace doob {

/// A point of the focus space Omega_Gamma (a real vector).
using Action = std::vector<ExtendedReal>;

/// Squared Euclidean distance between two actions of equal dimension.
ExtendedReal squared_loss(const Action& a, const Action& b);

/// Prior over finitely many parameters, a likelihood table and a focus map.
///
/// likelihood[t][j] is P(Y = ys[j] | Theta = thetas[t]); every row sums to
/// one. The prior may carry +inf weights (an improper prior); exact risk
/// integrals then refuse to run.
class FiniteModel {
 public:
  FiniteModel(std::vector<Value> thetas, std::vector<ExtendedReal> prior, std::vector<Value> ys,
              std::vector<std::vector<ExtendedReal>> likelihood, std::vector<Action> focus);

  std::size_t theta_count() const { return thetas_.size(); }
  std::size_t y_count() const { return ys_.size(); }
  std::size_t dimension() const { return focus_.front().size(); }
  std::span<const Value> thetas() const { return thetas_; }
  std::span<const Value> ys() const { return ys_; }
  const ExtendedReal& prior(std::size_t t) const { return prior_.at(t); }
  const ExtendedReal& likelihood(std::size_t t, std::size_t j) const { return likelihood_.at(t).at(j); }
  const Action& focus(std::size_t t) const { return focus_.at(t); }
  bool proper() const;

  std::optional<std::size_t> theta_index(const Value& theta) const;
  std::optional<std::size_t> y_index(const Value& y) const;

  /// P_Y(y_j) = sum_t prior(t) likelihood(t, j).
  std::vector<ExtendedReal> marginal() const;

 private:
  std::vector<Value> thetas_;
  std::vector<ExtendedReal> prior_;
  std::vector<Value> ys_;
  std::vector<std::vector<ExtendedReal>> likelihood_;
  std::vector<Action> focus_;
};

/// The model laid out as the measure space Omega = Theta x Y with the maps
/// Theta, Y and one coordinate map per focus dimension.
struct JointSpace {
  SpacePtr space;
  RandomMap theta;
  RandomMap y;
  std::vector<RandomMap> focus;
};

JointSpace joint_space(const FiniteModel& model);

/// phi restricted to the y-values of a finite model.
class DecisionRule {
 public:
  explicit DecisionRule(std::vector<std::optional<Action>> per_y) : per_y_(std::move(per_y)) {}

  std::size_t size() const { return per_y_.size(); }
  const std::optional<Action>& at(std::size_t j) const { return per_y_.at(j); }

 private:
  std::vector<std::optional<Action>> per_y_;
};

DecisionRule rule_from_factor(const FiniteModel& model, const FactorMap& phi);
/// Evaluates a fitted projection at numeric y-values.
DecisionRule rule_from_fit(const FiniteModel& model, const ProjectionFit& fit, const FeatureBasis& basis);
DecisionRule constant_rule(const FiniteModel& model, const Action& a);
/// Posterior mean of psi(Theta) at every y with finite positive marginal mass.
DecisionRule optimal_rule(const FiniteModel& model);

/// r = E |psi(Theta) - phi(Y)|^2, exact.
ExtendedReal bayes_risk(const FiniteModel& model, const DecisionRule& rule);
/// r^y = E(|psi(Theta) - phi(y)|^2 | Y = y).
ExtendedReal posterior_risk(const FiniteModel& model, const DecisionRule& rule, const Value& y);
/// E(psi(Theta) | Y = y).
Action optimal_action(const FiniteModel& model, const Value& y);
/// r^theta = E^theta |phi(Y) - psi(theta)|^2.
ExtendedReal frequentist_risk(const FiniteModel& model, const DecisionRule& rule, const Value& theta);
/// sum_theta r^theta prior(theta).
ExtendedReal integrate_frequentist(const FiniteModel& model, const DecisionRule& rule);

struct Decomposition {
  ExtendedReal bayes_risk;
  ExtendedReal integrated_posterior_risk;
  ExtendedReal discrepancy;
};

/// r against sum_y r^y P_Y(y).
Decomposition decompose(const FiniteModel& model, const DecisionRule& rule);

struct RiskEntry {
  Value at;
  ExtendedReal value;
  std::optional<double> stderr;
};

struct RiskReport {
  ExtendedReal bayes_risk;
  std::optional<double> bayes_stderr;
  std::vector<RiskEntry> posterior_risk;
  std::vector<RiskEntry> frequentist_risk;
  bool diverged = false;
};

RiskReport risk_report(const FiniteModel& model, const DecisionRule& rule);

// Monte Carlo path for continuous one-dimensional models.

struct MonteCarloOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
};

struct McEstimate {
  double value = 0.0;
  double stderr = 0.0;
  std::size_t samples = 0;
};

/// A model with a (possibly unnormalized) prior of mass `prior_mass`.
/// sample_theta draws from the normalized prior.
struct ContinuousModel {
  double prior_mass = 1.0;
  std::function<double(Stream&)> sample_theta;
  std::function<double(double theta, Stream&)> sample_y;
  std::function<double(double theta)> focus;
  /// Posterior mean and variance of focus(Theta) given Y = y; optional.
  std::function<std::pair<double, double>(double y)> posterior_moments;
};

using ScalarRule = std::function<double(double y)>;

McEstimate bayes_risk_mc(const ContinuousModel& model, const ScalarRule& rule,
                         const MonteCarloOptions& options);
McEstimate frequentist_risk_mc(const ContinuousModel& model, const ScalarRule& rule, double theta,
                               const MonteCarloOptions& options);
/// prior_mass * E[r^Y] with r^y from posterior_moments.
McEstimate integrated_posterior_risk_mc(const ContinuousModel& model, const ScalarRule& rule,
                                        const MonteCarloOptions& options);

/// Nodes and weights representing the prior measure.
struct PriorQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// sum_k w_k r^{theta_k}, each r^theta by Monte Carlo.
McEstimate integrate_frequentist_mc(const ContinuousModel& model, const ScalarRule& rule,
                                    const PriorQuadrature& prior, const MonteCarloOptions& options);

struct McDecomposition {
  McEstimate bayes_risk;
  McEstimate integrated_posterior_risk;
  double discrepancy = 0.0;
  double combined_stderr = 0.0;
};

/// Two estimators on independent streams derived from options.seed.
McDecomposition decompose_mc(const ContinuousModel& model, const ScalarRule& rule,
                             const MonteCarloOptions& options);

/// Relative change beyond which a truncation sequence is called divergent.
inline constexpr double kDivergenceTolerance = 0.10;

/// True when a relative change across the last three values exceeds the
/// tolerance. Two zeros count as no change.
bool cauchy_diverged(std::span<const double> risks, double tolerance = kDivergenceTolerance);

struct TruncationPoint {
  double truncation;
  McEstimate risk;
};

struct TruncationCurve {
  std::vector<TruncationPoint> points;
  bool diverged = false;
};

/// r(T) along an increasing list of truncations of a sigma-finite prior.
TruncationCurve truncated_risk_curve(const std::function<ContinuousModel(double)>& truncate,
                                     const ScalarRule& rule, std::span<const double> truncations,
                                     const MonteCarloOptions& options);

}  // namespace doob
