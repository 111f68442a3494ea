#include "doobdynkin/fiducial.hpp"

#include "doobdynkin/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace doob {

namespace {

constexpr std::size_t kChunk = 4096;

/// Composite Simpson rule with `intervals` (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int intervals) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Integral over [a, b], split at `kink` when it lies inside.
template <typename F>
double integrate_split(F&& f, double a, double b, double kink, int intervals) {
  if (kink > a && kink < b) return simpson(f, a, kink, intervals) + simpson(f, kink, b, intervals);
  return simpson(f, a, b, intervals);
}

bool closed_form_available(const FiducialPosterior& post, const Focus& psi) {
  return post.closed_form.has_value() && psi.kind() != FocusKind::custom;
}

void require_samples(const FiducialPosterior& post) {
  if (post.samples.empty()) throw std::invalid_argument("posterior carries no samples");
}

}  // namespace

Noise Noise::parse(std::string_view name) {
  if (name == "normal") return Noise(NoiseFamily::normal);
  if (name == "uniform") return Noise(NoiseFamily::uniform);
  if (name == "laplace") return Noise(NoiseFamily::laplace);
  if (name == "degenerate" || name == "zero") return Noise(NoiseFamily::degenerate);
  throw std::invalid_argument("unknown noise family '" + std::string(name) + "'");
}

std::string_view Noise::name() const {
  switch (family_) {
    case NoiseFamily::normal:
      return "normal";
    case NoiseFamily::uniform:
      return "uniform";
    case NoiseFamily::laplace:
      return "laplace";
    case NoiseFamily::degenerate:
      return "degenerate";
  }
  return "unknown";
}

double Noise::sample(Stream& stream) const {
  switch (family_) {
    case NoiseFamily::normal:
      return stream.normal();
    case NoiseFamily::uniform:
      return stream.uniform(-1.0, 1.0);
    case NoiseFamily::laplace:
      return stream.laplace();
    case NoiseFamily::degenerate:
      break;
  }
  return 0.0;
}

double Noise::density(double u) const {
  switch (family_) {
    case NoiseFamily::normal:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case NoiseFamily::uniform:
      return (u >= -1.0 && u <= 1.0) ? 0.5 : 0.0;
    case NoiseFamily::laplace:
      return 0.5 * std::exp(-std::abs(u));
    case NoiseFamily::degenerate:
      break;
  }
  throw std::logic_error("the degenerate noise has no density");
}

double Noise::cdf(double u) const {
  switch (family_) {
    case NoiseFamily::normal:
      return 0.5 * std::erfc(-u / std::numbers::sqrt2);
    case NoiseFamily::uniform:
      return std::clamp((u + 1.0) / 2.0, 0.0, 1.0);
    case NoiseFamily::laplace:
      return u < 0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u);
    case NoiseFamily::degenerate:
      break;
  }
  return u < 0 ? 0.0 : 1.0;
}

double Noise::variance() const {
  switch (family_) {
    case NoiseFamily::normal:
      return 1.0;
    case NoiseFamily::uniform:
      return 1.0 / 3.0;
    case NoiseFamily::laplace:
      return 2.0;
    case NoiseFamily::degenerate:
      break;
  }
  return 0.0;
}

double Noise::fourth_central_moment() const {
  switch (family_) {
    case NoiseFamily::normal:
      return 3.0;
    case NoiseFamily::uniform:
      return 1.0 / 5.0;
    case NoiseFamily::laplace:
      return 24.0;
    case NoiseFamily::degenerate:
      break;
  }
  return 0.0;
}

std::pair<double, double> Noise::effective_support() const {
  switch (family_) {
    case NoiseFamily::normal:
      return {-12.0, 12.0};
    case NoiseFamily::uniform:
      return {-1.0, 1.0};
    case NoiseFamily::laplace:
      return {-45.0, 45.0};
    case NoiseFamily::degenerate:
      break;
  }
  return {0.0, 0.0};
}

Focus Focus::identity() {
  return Focus(FocusKind::identity, "identity", 0.0, nullptr);
}

Focus Focus::square() {
  return Focus(FocusKind::square, "square", 0.0, nullptr);
}

Focus Focus::constant(double c) {
  return Focus(FocusKind::constant, "constant:" + format_double(c), c, nullptr);
}

Focus Focus::custom(std::string name, std::function<double(double)> f) {
  if (!f) throw std::invalid_argument("custom focus needs a function");
  return Focus(FocusKind::custom, std::move(name), 0.0, std::move(f));
}

Focus Focus::parse(std::string_view text) {
  if (text == "identity") return identity();
  if (text == "square") return square();
  constexpr std::string_view prefix = "constant:";
  if (text.substr(0, prefix.size()) == prefix) {
    return constant(parse_extended_real(text.substr(prefix.size())).to_double());
  }
  throw std::invalid_argument("unknown focus '" + std::string(text) + "'");
}

double Focus::operator()(double theta) const {
  switch (kind_) {
    case FocusKind::identity:
      return theta;
    case FocusKind::square:
      return theta * theta;
    case FocusKind::constant:
      return constant_;
    case FocusKind::custom:
      break;
  }
  return f_(theta);
}

double noise_normalization(const Noise& noise) {
  if (!noise.has_density()) return 1.0;
  const auto [lo, hi] = noise.effective_support();
  return integrate_split([&](double u) { return noise.density(u); }, lo, hi, 0.0, 4000);
}

void validate(const LocationModel& model) {
  const double total = noise_normalization(model.noise);
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("noise density integrates to " + format_double(total) + ", not 1");
  }
}

FiducialPosterior fiducial_posterior(const LocationModel& model, double y, std::size_t n,
                                     std::uint64_t seed, unsigned threads) {
  if (n == 0) throw std::invalid_argument("fiducial posterior needs at least one sample");
  FiducialPosterior post;
  post.y = y;
  post.noise = model.noise;
  switch (model.noise.family()) {
    case NoiseFamily::normal:
      post.closed_form = ClosedFormPosterior{"gaussian", y, 1.0};
      break;
    case NoiseFamily::uniform:
      post.closed_form = ClosedFormPosterior{"uniform", y, 1.0 / 3.0};
      break;
    case NoiseFamily::laplace:
      post.closed_form = ClosedFormPosterior{"laplace", y, 2.0};
      break;
    case NoiseFamily::degenerate:
      post.closed_form = ClosedFormPosterior{"point", y, 0.0};
      break;
  }
  post.samples.resize(n);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    Stream stream(seed, c);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) post.samples[i] = y - model.noise.sample(stream);
  });
  return post;
}

Estimate posterior_point_estimate(const FiducialPosterior& post, const Focus& psi, Route route) {
  const bool closed = closed_form_available(post, psi);
  if (route == Route::closed_form && !closed) {
    throw std::invalid_argument("no closed form for focus '" + psi.name() + "'");
  }
  if (closed && route != Route::samples) {
    const double m = post.y - post.noise.mean();
    switch (psi.kind()) {
      case FocusKind::identity:
        return {m, 0.0, true};
      case FocusKind::square:
        return {m * m + post.noise.variance(), 0.0, true};
      case FocusKind::constant:
        return {psi(0.0), 0.0, true};
      case FocusKind::custom:
        break;
    }
  }
  require_samples(post);
  Moments m;
  for (double theta : post.samples) m.add(psi(theta));
  return {m.mean, m.stderr_of_mean(), false};
}

Estimate posterior_risk_location(const FiducialPosterior& post, const Focus& psi, Route route) {
  const bool closed = closed_form_available(post, psi);
  if (route == Route::closed_form && !closed) {
    throw std::invalid_argument("no closed form for focus '" + psi.name() + "'");
  }
  if (closed && route != Route::samples) {
    const double var = post.noise.variance();
    const double m = post.y - post.noise.mean();
    switch (psi.kind()) {
      case FocusKind::identity:
        return {var, 0.0, true};
      case FocusKind::square:
        // theta = m - u with u symmetric: Var(theta^2) = 4 m^2 var + mu4 - var^2.
        return {4.0 * m * m * var + post.noise.fourth_central_moment() - var * var, 0.0, true};
      case FocusKind::constant:
        return {0.0, 0.0, true};
      case FocusKind::custom:
        break;
    }
  }
  require_samples(post);
  Moments m;
  for (double theta : post.samples) m.add(psi(theta));
  double m4 = 0.0;
  for (double theta : post.samples) {
    const double d = psi(theta) - m.mean;
    m4 += d * d * d * d;
  }
  const double n = m.count;
  m4 /= n;
  const double var = m.variance();
  return {var, std::sqrt(std::max(m4 - var * var, 0.0) / n), false};
}

Estimate posterior_risk_location(const LocationModel& model, double y, std::size_t n, std::uint64_t seed,
                                 Route route, unsigned threads) {
  return posterior_risk_location(fiducial_posterior(model, y, n, seed, threads), model.psi, route);
}

ScalarRule optimal_location_rule(const LocationModel& model) {
  const double shift = model.noise.mean();
  const double var = model.noise.variance();
  switch (model.psi.kind()) {
    case FocusKind::identity:
      return [shift](double y) { return y - shift; };
    case FocusKind::square:
      return [shift, var](double y) { return (y - shift) * (y - shift) + var; };
    case FocusKind::constant: {
      const double c = model.psi(0.0);
      return [c](double) { return c; };
    }
    case FocusKind::custom:
      break;
  }
  throw std::invalid_argument("no closed-form optimal rule for focus '" + model.psi.name() + "'");
}

ContinuousModel truncated_location_model(const LocationModel& model, double truncation) {
  if (!(truncation > 0)) throw std::invalid_argument("truncation must be positive");
  const double t = truncation;
  const Noise noise = model.noise;
  const Focus psi = model.psi;
  ContinuousModel out;
  out.prior_mass = 2.0 * t;
  out.sample_theta = [t](Stream& s) { return s.uniform(-t, t); };
  out.sample_y = [noise](double theta, Stream& s) { return theta + noise.sample(s); };
  out.focus = [psi](double theta) { return psi(theta); };
  out.posterior_moments = [noise, psi, t](double y) -> std::pair<double, double> {
    if (!noise.has_density()) {
      if (std::abs(y) > t) return {0.0, 0.0};
      return {psi(y), 0.0};
    }
    const auto [lo, hi] = noise.effective_support();
    const double a = std::max(-t, y - hi);
    const double b = std::min(t, y - lo);
    if (!(b > a)) return {0.0, 0.0};
    constexpr int panels = 400;
    const double z = integrate_split([&](double th) { return noise.density(y - th); }, a, b, y, panels);
    const double m1 =
        integrate_split([&](double th) { return psi(th) * noise.density(y - th); }, a, b, y, panels);
    const double m2 = integrate_split(
        [&](double th) { return psi(th) * psi(th) * noise.density(y - th); }, a, b, y, panels);
    if (!(z > 0)) return {0.0, 0.0};
    const double mean = m1 / z;
    return {mean, std::max(m2 / z - mean * mean, 0.0)};
  };
  return out;
}

DivergenceCurve divergence_demo(const LocationModel& model, std::span<const double> truncations,
                                const MonteCarloOptions& options) {
  validate(model);
  const ScalarRule rule = optimal_location_rule(model);
  const TruncationCurve curve = truncated_risk_curve(
      [&model](double t) { return truncated_location_model(model, t); }, rule, truncations, options);
  DivergenceCurve out;
  out.diverged = curve.diverged;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double t = curve.points[i].truncation;
    const Estimate ry = posterior_risk_location(model, t, options.samples,
                                                derive_seed(options.seed, 1000 + i), Route::samples,
                                                options.threads);
    out.points.push_back({t, curve.points[i].risk, ry});
  }
  return out;
}

}  // namespace doob
