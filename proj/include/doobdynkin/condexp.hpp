#pragma once

#include "doobdynkin/errors.hpp"
#include "doobdynkin/measure.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace doob {

/// E(Gamma | Y = y) on the fibers of Y with finite positive mass.
struct CondExpTable {
  struct Entry {
    Value y;
    ExtendedReal phi;
    ExtendedReal mass;
  };
  std::vector<Entry> entries;      // in Y-codomain order
  std::vector<Value> undefined;    // zero-mass fibers

  std::optional<ExtendedReal> operator()(const Value& y) const;
};

/// phi(y) = sum_{Y(w)=y} Gamma(w) weight(w) / P_Y(y) for 0 < P_Y(y) < inf.
/// Throws NonSigmaFinite when some fiber has infinite mass.
CondExpTable condexp_discrete(const FiniteSpace& space, const RandomMap& gamma, const RandomMap& y);

struct Feature {
  std::string name;
  std::function<double(double)> eval;
};

/// Finite basis spanning a subspace of functions of y.
class FeatureBasis {
 public:
  FeatureBasis() = default;
  explicit FeatureBasis(std::vector<Feature> features) : features_(std::move(features)) {}

  static Feature constant();
  static Feature power(int degree);
  static Feature indicator(double value);
  /// 1 on [lower, upper), 0 elsewhere.
  static Feature interval(double lower, double upper);

  void add(Feature f) { features_.push_back(std::move(f)); }
  std::size_t size() const { return features_.size(); }
  const Feature& operator[](std::size_t j) const { return features_.at(j); }
  std::span<const Feature> features() const { return features_; }
  void evaluate(double y, std::span<double> out) const;

 private:
  std::vector<Feature> features_;
};

struct Sample {
  double y;
  double gamma;
};

struct ProjectionOptions {
  /// nullopt selects 1e-8 times the mean diagonal of the normal matrix.
  std::optional<double> ridge;
  /// With ridge == 0 only: fall back to the minimal-norm solution instead of
  /// throwing DegenerateBasis.
  bool min_norm_fallback = false;
  /// Normal systems with a larger condition number are degenerate.
  double max_condition = 1e12;
  unsigned threads = 0;
};

struct ProjectionFit {
  std::vector<double> coefficients;
  double residual_risk = 0.0;
  std::size_t sample_count = 0;
  double condition = 1.0;
  double ridge = 0.0;
  bool min_norm = false;
};

/// Minimizes (1/N) sum (gamma_i - c . f(y_i))^2 + ridge |c|^2.
ProjectionFit project_l2(std::span<const Sample> samples, const FeatureBasis& basis,
                         const ProjectionOptions& options = {});

double evaluate_fit(const ProjectionFit& fit, const FeatureBasis& basis, double y);

/// (1/N) sum (gamma_i - c . f(y_i))^2 for an arbitrary coefficient vector.
double empirical_risk(std::span<const Sample> samples, const FeatureBasis& basis,
                      std::span<const double> coefficients, unsigned threads = 0);

/// (1/N) sum r_i f_j(y_i) for the residuals r of `coefficients`.
std::vector<double> residual_correlations(std::span<const Sample> samples, const FeatureBasis& basis,
                                          std::span<const double> coefficients, unsigned threads = 0);

}  // namespace doob
