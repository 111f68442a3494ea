#include "doobdynkin/fiducial.hpp"
#include "doobdynkin/risk.hpp"

#include "doctest.h"
#include "model_helpers.hpp"

#include <random>

using namespace doob;
using oracle::Q;
using testing_helpers::rule_of;
using testing_helpers::to_library;

TEST_CASE("exact risks match direct summation") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const oracle::Model m = oracle::random_model(rng, 1 + trial % 4, 1 + trial % 3);
    const FiniteModel model = to_library(m);
    std::vector<Q> phi;
    for (std::size_t j = 0; j < model.y_count(); ++j) phi.push_back(Q(static_cast<int>(j) - 1, 2));
    const DecisionRule rule = rule_of(phi);
    CHECK(bayes_risk(model, rule) == ExtendedReal(oracle::bayes_risk(m, phi)));
    CHECK(integrate_frequentist(model, rule) == bayes_risk(model, rule));
    for (std::size_t j = 0; j < model.y_count(); ++j) {
      CHECK(posterior_risk(model, rule, Value(static_cast<int>(j))) == ExtendedReal(oracle::posterior_risk(m, phi, j)));
      CHECK(optimal_action(model, Value(static_cast<int>(j)))[0] == ExtendedReal(oracle::posterior_mean(m, j)));
    }
    for (std::size_t t = 0; t < model.theta_count(); ++t) {
      CHECK(frequentist_risk(model, rule, Value(static_cast<int>(t))) ==
            ExtendedReal(oracle::frequentist_risk(m, phi, t)));
    }
    const Decomposition d = decompose(model, rule);
    CHECK(d.discrepancy.is_zero());
    CHECK(d.discrepancy.is_exact());
  }
}

TEST_CASE("the posterior mean minimizes Bayes risk over every binary rule") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    oracle::Model m = oracle::random_model(rng, 3, 3);
    for (auto& p : m.psi) p = (p > 0) ? 1 : 0;
    const FiniteModel model = to_library(m);
    const DecisionRule best = optimal_rule(model);
    const ExtendedReal r = bayes_risk(model, best);
    ExtendedReal total_posterior_variance(0);
    const auto marg = model.marginal();
    for (std::size_t j = 0; j < model.y_count(); ++j) {
      total_posterior_variance += posterior_risk(model, best, model.ys()[j]) * marg[j];
    }
    CHECK(r == total_posterior_variance);
    for (int mask = 0; mask < 8; ++mask) {
      std::vector<Q> phi{Q(mask & 1), Q((mask >> 1) & 1), Q((mask >> 2) & 1)};
      CHECK(r <= ExtendedReal(oracle::bayes_risk(m, phi)));
    }
  }
}

TEST_CASE("optimal action beats a grid of candidates pointwise") {
  std::mt19937_64 rng(23);
  const oracle::Model m = oracle::random_model(rng, 4, 3);
  const FiniteModel model = to_library(m);
  const DecisionRule best = optimal_rule(model);
  for (std::size_t j = 0; j < model.y_count(); ++j) {
    const Value y(static_cast<int>(j));
    const ExtendedReal rb = posterior_risk(model, best, y);
    for (int k = -40; k <= 40; ++k) {
      const DecisionRule c = constant_rule(model, Action{ExtendedReal::ratio(k, 10)});
      CHECK(rb <= posterior_risk(model, c, y));
    }
  }
}

TEST_CASE("degenerate cases") {
  // Constant focus and constant rule.
  oracle::Model m{{Q(1, 2), Q(1, 2)}, {{Q(1, 3), Q(2, 3)}, {Q(1), Q(0)}}, {Q(5), Q(5)}};
  const FiniteModel model = to_library(m);
  CHECK(bayes_risk(model, constant_rule(model, Action{ExtendedReal(5)})).is_zero());

  // Deterministic Y: a single fiber.
  oracle::Model det{{Q(1, 4), Q(3, 4)}, {{Q(1)}, {Q(1)}}, {Q(0), Q(2)}};
  const FiniteModel dmodel = to_library(det);
  const DecisionRule drule = constant_rule(dmodel, Action{ExtendedReal(1)});
  CHECK(bayes_risk(dmodel, drule) == posterior_risk(dmodel, drule, Value(0)));

  // Point-mass prior.
  oracle::Model point{{Q(1), Q(0)}, {{Q(1, 2), Q(1, 2)}, {Q(1, 5), Q(4, 5)}}, {Q(3), Q(-1)}};
  const FiniteModel pmodel = to_library(point);
  for (int j = 0; j < 2; ++j) CHECK(optimal_action(pmodel, Value(j))[0] == ExtendedReal(3));
  const DecisionRule prule = rule_of({Q(1), Q(2)});
  CHECK(bayes_risk(pmodel, prule) == frequentist_risk(pmodel, prule, Value(0)));

  // Clairvoyant rule at a fixed theta.
  CHECK(frequentist_risk(pmodel, constant_rule(pmodel, Action{ExtendedReal(3)}), Value(0)).is_zero());
}

TEST_CASE("undefined fibers and improper priors") {
  oracle::Model m{{Q(1), Q(1)}, {{Q(1), Q(0)}, {Q(1), Q(0)}}, {Q(0), Q(1)}};
  const FiniteModel model = to_library(m);
  CHECK_THROWS_AS(posterior_risk(model, optimal_rule(model), Value(1)), UndefinedFiber);
  CHECK_FALSE(optimal_rule(model).at(1));

  std::vector<Value> thetas{Value(0), Value(1)};
  std::vector<ExtendedReal> prior{ExtendedReal(1), ExtendedReal::infinity()};
  std::vector<Value> ys{Value(0), Value(1)};
  std::vector<std::vector<ExtendedReal>> lik{{ExtendedReal::ratio(1, 2), ExtendedReal::ratio(1, 2)},
                                             {ExtendedReal(1), ExtendedReal(0)}};
  std::vector<Action> focus{{ExtendedReal(0)}, {ExtendedReal(1)}};
  const FiniteModel improper(thetas, prior, ys, lik, focus);
  CHECK_FALSE(improper.proper());
  const DecisionRule rule = constant_rule(improper, Action{ExtendedReal(0)});
  CHECK_THROWS_AS(bayes_risk(improper, rule), ImproperPriorNeedsTruncation);
  CHECK_THROWS_AS(decompose(improper, rule), ImproperPriorNeedsTruncation);
  CHECK_THROWS_AS(posterior_risk(improper, rule, Value(0)), NonSigmaFinite);
  CHECK(posterior_risk(improper, rule, Value(1)) == ExtendedReal(0));
}

TEST_CASE("model validation") {
  std::vector<Value> thetas{Value(0)};
  std::vector<Value> ys{Value(0), Value(1)};
  std::vector<Action> focus{{ExtendedReal(0)}};
  CHECK_THROWS(FiniteModel(thetas, {ExtendedReal(1)}, ys, {{ExtendedReal::ratio(1, 2), ExtendedReal::ratio(1, 3)}},
                           focus));
  CHECK_THROWS(FiniteModel(thetas, {ExtendedReal(-1)}, ys, {{ExtendedReal(1), ExtendedReal(0)}}, focus));
  CHECK_NOTHROW(FiniteModel(thetas, {ExtendedReal(1)}, ys, {{ExtendedReal(0.3), ExtendedReal(0.7)}}, focus));
}

TEST_CASE("joint space carries the model as a measure space") {
  oracle::Model m{{Q(1, 3), Q(2, 3)}, {{Q(1, 4), Q(3, 4)}, {Q(1, 2), Q(1, 2)}}, {Q(0), Q(1)}};
  const FiniteModel model = to_library(m);
  const JointSpace js = joint_space(model);
  CHECK(js.space->size() == 4);
  CHECK(js.space->total_mass() == ExtendedReal(1));
  CHECK(js.focus.size() == 1);
  const auto law = pushforward(*js.space, js.y);
  CHECK(law.mass_of(Value(0)) == ExtendedReal(oracle::marginal(m, 0)));
}

TEST_CASE("location model risks by Monte Carlo") {
  const LocationModel loc{Noise(NoiseFamily::normal), Focus::identity()};
  const ScalarRule identity = [](double y) { return y; };
  MonteCarloOptions opt;
  opt.samples = 50000;
  const ContinuousModel model = truncated_location_model(loc, 10.0);
  for (double theta : {-3.0, 0.0, 4.0}) {
    const McEstimate r = frequentist_risk_mc(model, identity, theta, opt);
    CHECK(std::abs(r.value - 1.0) < 3.0 * r.stderr);
  }
  const McEstimate b = bayes_risk_mc(model, identity, opt);
  CHECK(std::abs(b.value - 20.0) < 3.0 * b.stderr);

  PriorQuadrature quad;
  for (int k = 0; k < 20; ++k) {
    quad.nodes.push_back(-10.0 + 0.5 + k);
    quad.weights.push_back(1.0);
  }
  opt.samples = 5000;
  const McEstimate integ = integrate_frequentist_mc(model, identity, quad, opt);
  CHECK(std::abs(integ.value - 20.0) < 3.0 * integ.stderr);

  opt.samples = 50000;
  const McDecomposition d = decompose_mc(model, identity, opt);
  CHECK(std::abs(d.discrepancy) < 3.0 * d.combined_stderr);
}

TEST_CASE("divergence detection") {
  const std::vector<double> growing{2.0, 20.0, 200.0};
  const std::vector<double> settled{1.0, 1.01, 1.011};
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  CHECK(cauchy_diverged(growing));
  CHECK_FALSE(cauchy_diverged(settled));
  CHECK_FALSE(cauchy_diverged(zeros));

  const LocationModel flat{Noise(NoiseFamily::degenerate), Focus::identity()};
  const std::vector<double> ts{1.0, 10.0, 100.0};
  MonteCarloOptions opt;
  opt.samples = 1000;
  const TruncationCurve curve = truncated_risk_curve([&](double t) { return truncated_location_model(flat, t); },
                                                     [](double y) { return y; }, ts, opt);
  for (const auto& p : curve.points) CHECK(p.risk.value == 0.0);
  CHECK_FALSE(curve.diverged);
  const std::vector<double> bad{10.0, 1.0};
  CHECK_THROWS(truncated_risk_curve([&](double t) { return truncated_location_model(flat, t); },
                                    [](double y) { return y; }, bad, opt));
}
