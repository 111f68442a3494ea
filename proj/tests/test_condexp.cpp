#include "doobdynkin/condexp.hpp"
#include "doobdynkin/random.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace doob;

namespace {

RandomMap int_map(const SpacePtr& space, const std::vector<int>& v) {
  std::vector<Value> vals(v.begin(), v.end());
  return RandomMap::from_values(space, vals);
}

}  // namespace

TEST_CASE("condexp of a constant is that constant") {
  auto s = make_space({"a", "b", "c"}, {ExtendedReal(1), ExtendedReal::ratio(2, 3), ExtendedReal(0)});
  const auto t = condexp_discrete(*s, int_map(s, {4, 4, 4}), int_map(s, {0, 1, 2}));
  REQUIRE(t.entries.size() == 2);
  for (const auto& e : t.entries) CHECK(e.phi == ExtendedReal(4));
  REQUIRE(t.undefined.size() == 1);
  CHECK(t.undefined[0] == Value(2));
  CHECK_FALSE(t(Value(2)));
}

TEST_CASE("weighted cell averages") {
  auto s = make_space({"1", "2", "3"}, {ExtendedReal(1), ExtendedReal(1), ExtendedReal(2)});
  const auto t = condexp_discrete(*s, int_map(s, {1, 2, 3}), int_map(s, {0, 0, 1}));
  CHECK(*t(Value(0)) == ExtendedReal::ratio(3, 2));
  CHECK(*t(Value(1)) == ExtendedReal(3));
  CHECK(t.entries[0].mass == ExtendedReal(2));
}

TEST_CASE("infinite fibers are refused") {
  auto s = make_space({"a", "b"}, {ExtendedReal(1), ExtendedReal::infinity()});
  CHECK_THROWS_AS(condexp_discrete(*s, int_map(s, {1, 2}), int_map(s, {0, 0})), NonSigmaFinite);
  CHECK_THROWS_AS(condexp_discrete(*s, int_map(s, {1, 2}), int_map(s, {0, 1})), NonSigmaFinite);
}

TEST_CASE("agrees with the rational oracle and satisfies the tower property") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> w(0, 4);
  std::uniform_int_distribution<int> g(-5, 5);
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::string> atoms;
    std::vector<ExtendedReal> weights;
    std::vector<oracle::Q> qw;
    for (std::size_t i = 0; i < n; ++i) {
      atoms.push_back("w" + std::to_string(i));
      const oracle::Q q(w(rng) + (i == 0 ? 1 : 0), 3);
      qw.push_back(q);
      weights.emplace_back(q);
    }
    auto s = make_space(atoms, weights);
    std::vector<int> gv(n);
    std::vector<oracle::Q> gq(n);
    for (std::size_t i = 0; i < n; ++i) gq[i] = gv[i] = g(rng);
    const RandomMap gamma = int_map(s, gv);
    const auto parts = oracle::all_set_partitions(n);
    for (const auto& fine : parts) {
      const auto expected = oracle::conditional_mean(qw, gq, fine);
      const auto table = condexp_discrete(*s, gamma, int_map(s, fine));
      for (const auto& [label, value] : expected) CHECK(*table(Value(label)) == ExtendedReal(value));
      CHECK(table.entries.size() == expected.size());

      for (const auto& coarse : parts) {
        if (!oracle::coarsens(coarse, fine)) continue;
        // E(E(g | fine) | coarse) computed through the library, against E(g | coarse).
        // Atoms in zero-mass fine cells carry no weight, so any value works there.
        std::vector<Value> inner(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto v = table(Value(fine[i]));
          inner[i] = v ? Value(*v) : Value(0);
        }
        const auto lhs = condexp_discrete(*s, RandomMap::from_values(s, inner), int_map(s, coarse));
        const auto rhs = condexp_discrete(*s, gamma, int_map(s, coarse));
        REQUIRE(lhs.entries.size() == rhs.entries.size());
        for (std::size_t k = 0; k < lhs.entries.size(); ++k) CHECK(lhs.entries[k].phi == rhs.entries[k].phi);
      }
    }
  }
}

TEST_CASE("projection recovers a target in the span") {
  FeatureBasis basis;
  basis.add(FeatureBasis::power(2));
  basis.add(FeatureBasis::constant());
  basis.add(FeatureBasis::power(1));
  std::vector<Sample> samples;
  for (int i = 0; i < 200; ++i) {
    const double y = -1.0 + 0.01 * i;
    samples.push_back({y, y * y});
  }
  ProjectionOptions opt;
  opt.ridge = 0.0;
  const ProjectionFit fit = project_l2(samples, basis, opt);
  CHECK(fit.coefficients[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(fit.coefficients[1]) < 1e-10);
  CHECK(std::abs(fit.coefficients[2]) < 1e-10);
  CHECK(fit.residual_risk <= 1e-12);
  for (double y : {-0.7, 0.0, 0.3, 2.0}) CHECK(evaluate_fit(fit, basis, y) == doctest::Approx(y * y).epsilon(1e-10));

  ProjectionFit zero;
  zero.coefficients = {0.0, 0.0, 0.0};
  CHECK(evaluate_fit(zero, basis, 1.5) == 0.0);
}

TEST_CASE("indicator basis reproduces condexp_discrete") {
  auto s = make_space({"a", "b", "c", "d", "e"},
                      {ExtendedReal(1), ExtendedReal(2), ExtendedReal(1), ExtendedReal(3), ExtendedReal(1)});
  const std::vector<int> yv{0, 0, 1, 1, 2};
  const std::vector<int> gv{3, -1, 4, 2, 7};
  const auto table = condexp_discrete(*s, int_map(s, gv), int_map(s, yv));

  std::vector<Sample> samples;
  for (std::size_t i = 0; i < yv.size(); ++i) {
    const int copies = static_cast<int>(s->weight(i).to_double());
    for (int c = 0; c < copies; ++c) samples.push_back({double(yv[i]), double(gv[i])});
  }
  FeatureBasis basis;
  for (int v = 0; v < 3; ++v) basis.add(FeatureBasis::indicator(v));
  ProjectionOptions opt;
  opt.ridge = 0.0;
  const ProjectionFit fit = project_l2(samples, basis, opt);
  for (int v = 0; v < 3; ++v) {
    CHECK(evaluate_fit(fit, basis, v) == doctest::Approx(table(Value(v))->to_double()).epsilon(1e-10));
  }
}

TEST_CASE("normal-location regression slope approaches one as the prior widens") {
  FeatureBasis basis;
  basis.add(FeatureBasis::constant());
  basis.add(FeatureBasis::power(1));
  double previous_gap = 1.0;
  for (double sd : {1.0, 10.0, 100.0}) {
    Stream st(kDefaultSeed, static_cast<std::uint64_t>(sd));
    std::vector<Sample> samples;
    for (int i = 0; i < 20000; ++i) {
      const double theta = sd * st.normal();
      samples.push_back({theta + st.normal(), theta});
    }
    const ProjectionFit fit = project_l2(samples, basis);
    const double exact_slope = sd * sd / (sd * sd + 1.0);
    CHECK(fit.coefficients[1] == doctest::Approx(exact_slope).epsilon(0.03));
    const double gap = std::abs(1.0 - fit.coefficients[1]);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
  CHECK(previous_gap < 1e-3);
}

TEST_CASE("projection optimality and orthogonality") {
  Stream st(3, 3);
  std::vector<Sample> samples;
  for (int i = 0; i < 5000; ++i) {
    const double y = st.uniform(-2.0, 2.0);
    samples.push_back({y, std::sin(y) + 0.2 * st.normal()});
  }
  FeatureBasis basis;
  basis.add(FeatureBasis::constant());
  basis.add(FeatureBasis::power(1));
  basis.add(FeatureBasis::power(3));
  basis.add(FeatureBasis::interval(0.0, 1.0));
  ProjectionOptions opt;
  opt.ridge = 0.0;
  const ProjectionFit fit = project_l2(samples, basis, opt);
  CHECK(empirical_risk(samples, basis, fit.coefficients) == doctest::Approx(fit.residual_risk).epsilon(1e-12));

  double gamma_rms = 0.0;
  for (const auto& s : samples) gamma_rms += s.gamma * s.gamma;
  gamma_rms = std::sqrt(gamma_rms / samples.size());
  const auto corr = residual_correlations(samples, basis, fit.coefficients);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    double f_rms = 0.0;
    for (const auto& s : samples) {
      const double f = basis[j].eval(s.y);
      f_rms += f * f;
    }
    f_rms = std::sqrt(f_rms / samples.size());
    CHECK(std::abs(corr[j]) <= 1e-8 * f_rms * gamma_rms);
  }

  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c = fit.coefficients;
    const double scale = std::pow(10.0, -1 - trial % 6);
    for (auto& v : c) v += scale * n01(rng);
    CHECK(empirical_risk(samples, basis, c) >= fit.residual_risk);
  }
}

TEST_CASE("degenerate bases") {
  std::vector<Sample> samples;
  for (int i = 0; i < 50; ++i) samples.push_back({0.1 * i, 1.0 + 0.1 * i});
  FeatureBasis basis;
  basis.add(FeatureBasis::constant());
  basis.add(FeatureBasis::constant());
  ProjectionOptions opt;
  opt.ridge = 0.0;
  CHECK_THROWS_AS(project_l2(samples, basis, opt), DegenerateBasis);
  opt.min_norm_fallback = true;
  const ProjectionFit fit = project_l2(samples, basis, opt);
  CHECK(fit.min_norm);
  CHECK(fit.coefficients[0] == doctest::Approx(fit.coefficients[1]));
  const ProjectionFit ridged = project_l2(samples, basis);
  CHECK_FALSE(ridged.min_norm);
  CHECK(ridged.ridge > 0.0);
  CHECK_THROWS(project_l2(std::vector<Sample>{}, basis));
}
