#include "doobdynkin/condexp.hpp"

#include "doobdynkin/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace doob {

namespace {

constexpr std::size_t kChunk = 4096;

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

struct NormalSystem {
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
};

NormalSystem accumulate(std::span<const Sample> samples, const FeatureBasis& basis, unsigned threads) {
  const auto p = static_cast<Eigen::Index>(basis.size());
  const std::size_t chunks = chunk_count(samples.size());
  std::vector<NormalSystem> partial(chunks, {Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p)});
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    Eigen::VectorXd f(p);
    auto& part = partial[c];
    const std::size_t end = std::min(samples.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      basis.evaluate(samples[i].y, std::span<double>(f.data(), f.size()));
      if (!f.allFinite()) {
        throw std::invalid_argument("a feature is not finite at y = " + std::to_string(samples[i].y));
      }
      part.gram.noalias() += f * f.transpose();
      part.rhs += samples[i].gamma * f;
    }
  });
  NormalSystem total{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p)};
  for (const auto& part : partial) {
    total.gram += part.gram;
    total.rhs += part.rhs;
  }
  const double n = static_cast<double>(samples.size());
  total.gram /= n;
  total.rhs /= n;
  return total;
}

}  // namespace

std::optional<ExtendedReal> CondExpTable::operator()(const Value& y) const {
  for (const auto& e : entries) {
    if (e.y == y) return e.phi;
  }
  return std::nullopt;
}

CondExpTable condexp_discrete(const FiniteSpace& space, const RandomMap& gamma, const RandomMap& y) {
  if (!(space == gamma.domain()) || !(space == y.domain())) {
    throw DomainMismatch("condexp: Gamma and Y must live on the given space");
  }
  for (const auto& v : gamma.codomain()) {
    if (!v.is_number() || v.number().is_infinite()) {
      throw std::invalid_argument("Gamma must take finite real values, got '" + v.to_string() + "'");
    }
  }
  const std::size_t k = y.codomain().size();
  std::vector<ExtendedReal> mass(k, ExtendedReal(0));
  std::vector<ExtendedReal> integral(k, ExtendedReal(0));
  for (std::size_t atom = 0; atom < space.size(); ++atom) {
    const std::size_t v = y.index_at(atom);
    mass[v] += space.weight(atom);
    if (!space.weight(atom).is_infinite()) integral[v] += gamma.at(atom).number() * space.weight(atom);
  }
  CondExpTable table;
  for (std::size_t v = 0; v < k; ++v) {
    if (mass[v].is_infinite()) {
      throw NonSigmaFinite("fiber Y = " + y.codomain()[v].to_string() +
                           " has infinite mass; the law of Y is not sigma-finite");
    }
    if (mass[v].is_zero()) {
      table.undefined.push_back(y.codomain()[v]);
    } else {
      table.entries.push_back({y.codomain()[v], integral[v] / mass[v], mass[v]});
    }
  }
  return table;
}

Feature FeatureBasis::constant() {
  return {"1", [](double) { return 1.0; }};
}

Feature FeatureBasis::power(int degree) {
  if (degree < 0) throw std::invalid_argument("negative power feature");
  if (degree == 0) return constant();
  return {"y^" + std::to_string(degree), [degree](double y) { return std::pow(y, degree); }};
}

Feature FeatureBasis::indicator(double value) {
  std::ostringstream name;
  name << "[y=" << format_double(value) << "]";
  return {name.str(), [value](double y) { return y == value ? 1.0 : 0.0; }};
}

Feature FeatureBasis::interval(double lower, double upper) {
  if (!(lower < upper)) throw std::invalid_argument("empty interval feature");
  return {"[" + format_double(lower) + "<=y<" + format_double(upper) + "]",
          [lower, upper](double y) { return (y >= lower && y < upper) ? 1.0 : 0.0; }};
}

void FeatureBasis::evaluate(double y, std::span<double> out) const {
  for (std::size_t j = 0; j < features_.size(); ++j) out[j] = features_[j].eval(y);
}

ProjectionFit project_l2(std::span<const Sample> samples, const FeatureBasis& basis,
                         const ProjectionOptions& options) {
  const std::size_t p = basis.size();
  if (p == 0) throw std::invalid_argument("empty feature basis");
  if (samples.size() < p) {
    throw std::invalid_argument("need at least as many samples as features");
  }
  if (options.ridge && *options.ridge < 0) throw std::invalid_argument("negative ridge");

  const NormalSystem system = accumulate(samples, basis, options.threads);
  const auto dim = static_cast<Eigen::Index>(p);
  const double ridge = options.ridge.value_or(1e-8 * system.gram.trace() / static_cast<double>(p));
  const Eigen::MatrixXd regularized = system.gram + ridge * Eigen::MatrixXd::Identity(dim, dim);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(regularized, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double condition = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();

  ProjectionFit fit;
  fit.sample_count = samples.size();
  fit.condition = condition;
  fit.ridge = ridge;

  Eigen::VectorXd coef;
  if (condition <= options.max_condition) {
    Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    coef = llt.solve(system.rhs);
    // One refinement step against residuals recomputed from the raw samples.
    const auto corr = residual_correlations(samples, basis, std::span<const double>(coef.data(), p),
                                            options.threads);
    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(corr.data(), dim) - ridge * coef;
    coef += llt.solve(g);
  } else if (ridge == 0.0 && options.min_norm_fallback) {
    coef = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(system.gram).solve(system.rhs);
    fit.min_norm = true;
  } else {
    std::ostringstream msg;
    msg << "normal system condition " << condition << " exceeds " << options.max_condition
        << " with ridge " << ridge;
    throw DegenerateBasis(msg.str());
  }
  fit.coefficients.assign(coef.data(), coef.data() + p);
  fit.residual_risk = empirical_risk(samples, basis, fit.coefficients, options.threads);
  return fit;
}

double evaluate_fit(const ProjectionFit& fit, const FeatureBasis& basis, double y) {
  if (fit.coefficients.size() != basis.size()) {
    throw std::invalid_argument("fit and basis differ in dimension");
  }
  double out = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) out += fit.coefficients[j] * basis[j].eval(y);
  return out;
}

double empirical_risk(std::span<const Sample> samples, const FeatureBasis& basis,
                      std::span<const double> coefficients, unsigned threads) {
  if (samples.empty()) return 0.0;
  const std::size_t chunks = chunk_count(samples.size());
  std::vector<double> partial(chunks, 0.0);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    std::vector<double> f(basis.size());
    const std::size_t end = std::min(samples.size(), (c + 1) * kChunk);
    double sum = 0.0;
    for (std::size_t i = c * kChunk; i < end; ++i) {
      basis.evaluate(samples[i].y, f);
      double pred = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j) pred += coefficients[j] * f[j];
      const double r = samples[i].gamma - pred;
      sum += r * r;
    }
    partial[c] = sum;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total / static_cast<double>(samples.size());
}

std::vector<double> residual_correlations(std::span<const Sample> samples, const FeatureBasis& basis,
                                          std::span<const double> coefficients, unsigned threads) {
  const std::size_t p = basis.size();
  const std::size_t chunks = chunk_count(samples.size());
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(p, 0.0));
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    std::vector<double> f(p);
    const std::size_t end = std::min(samples.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      basis.evaluate(samples[i].y, f);
      double pred = 0.0;
      for (std::size_t j = 0; j < p; ++j) pred += coefficients[j] * f[j];
      const double r = samples[i].gamma - pred;
      for (std::size_t j = 0; j < p; ++j) partial[c][j] += r * f[j];
    }
  });
  std::vector<double> total(p, 0.0);
  for (const auto& part : partial) {
    for (std::size_t j = 0; j < p; ++j) total[j] += part[j];
  }
  for (double& t : total) t /= static_cast<double>(samples.size());
  return total;
}

}  // namespace doob
