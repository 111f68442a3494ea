#pragma once

#include "doobdynkin/random.hpp"
#include "doobdynkin/risk.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace doob {

enum class NoiseFamily { normal, uniform, laplace, degenerate };

/// Distribution of the additive noise u in y = theta + u.
///
/// normal(0,1), uniform(-1,1), Laplace(0,1) or the point mass at 0.
class Noise {
 public:
  explicit Noise(NoiseFamily family = NoiseFamily::normal) : family_(family) {}
  /// "normal", "uniform", "laplace", "degenerate" (alias "zero").
  static Noise parse(std::string_view name);

  NoiseFamily family() const { return family_; }
  std::string_view name() const;

  double sample(Stream& stream) const;
  bool has_density() const { return family_ != NoiseFamily::degenerate; }
  double density(double u) const;
  double cdf(double u) const;
  double mean() const { return 0.0; }
  double variance() const;
  double fourth_central_moment() const;
  /// Interval carrying (all but a negligible tail of) the mass.
  std::pair<double, double> effective_support() const;

 private:
  NoiseFamily family_;
};

enum class FocusKind { identity, square, constant, custom };

/// The focus map psi applied to the parameter.
class Focus {
 public:
  static Focus identity();
  static Focus square();
  static Focus constant(double c);
  static Focus custom(std::string name, std::function<double(double)> f);
  /// "identity", "square", "constant:<c>".
  static Focus parse(std::string_view text);

  FocusKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double operator()(double theta) const;

 private:
  Focus(FocusKind kind, std::string name, double c, std::function<double(double)> f)
      : kind_(kind), name_(std::move(name)), constant_(c), f_(std::move(f)) {}

  FocusKind kind_;
  std::string name_;
  double constant_ = 0.0;
  std::function<double(double)> f_;
};

struct LocationModel {
  Noise noise;
  Focus psi = Focus::identity();
};

/// Numerical integral of the noise density over its effective support.
double noise_normalization(const Noise& noise);
/// Throws std::invalid_argument when the density does not integrate to 1
/// within 1e-6.
void validate(const LocationModel& model);

/// Closed-form law of theta = y - u.
struct ClosedFormPosterior {
  std::string family;  // "gaussian", "uniform", "laplace", "point"
  double mean = 0.0;
  double variance = 0.0;
};

struct FiducialPosterior {
  double y = 0.0;
  Noise noise;
  std::optional<ClosedFormPosterior> closed_form;
  std::vector<double> samples;  // theta_i = y - u_i
};

FiducialPosterior fiducial_posterior(const LocationModel& model, double y, std::size_t n,
                                     std::uint64_t seed, unsigned threads = 0);

enum class Route { automatic, closed_form, samples };

struct Estimate {
  double value = 0.0;
  double stderr = 0.0;  // zero on the closed-form route
  bool closed_form = false;
};

/// Posterior mean of psi(theta).
Estimate posterior_point_estimate(const FiducialPosterior& post, const Focus& psi,
                                  Route route = Route::automatic);

/// Posterior variance of psi(theta), i.e. r^y for the posterior-mean action.
Estimate posterior_risk_location(const FiducialPosterior& post, const Focus& psi,
                                 Route route = Route::automatic);

/// Convenience overload drawing its own posterior sample.
Estimate posterior_risk_location(const LocationModel& model, double y, std::size_t n, std::uint64_t seed,
                                 Route route = Route::automatic, unsigned threads = 0);

/// The optimal action y -> E^y psi(theta) in closed form. Throws for custom
/// focus maps.
ScalarRule optimal_location_rule(const LocationModel& model);

/// Lebesgue prior restricted to [-T, T] (unnormalized mass 2T).
ContinuousModel truncated_location_model(const LocationModel& model, double truncation);

struct DivergencePoint {
  double truncation = 0.0;
  McEstimate bayes_risk;
  Estimate posterior_risk;  // under the untruncated prior, at y = T
};

struct DivergenceCurve {
  std::vector<DivergencePoint> points;
  bool diverged = false;
};

/// r(T) for the posterior-mean rule under truncated Lebesgue priors,
/// alongside the (constant) posterior risk.
DivergenceCurve divergence_demo(const LocationModel& model, std::span<const double> truncations,
                                const MonteCarloOptions& options);

}  // namespace doob
