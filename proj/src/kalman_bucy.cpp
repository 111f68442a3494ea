#include "doobdynkin/kalman_bucy.hpp"

#include "doobdynkin/parallel.hpp"
#include "doobdynkin/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace doob {

namespace {

constexpr std::size_t kPathsPerChunk = 64;
constexpr int kMaxHalvings = 20;

double riccati_rhs(const KalmanBucyModel& m, double s) {
  const double a = m.obs_gain * m.obs_gain / (m.obs_noise * m.obs_noise);
  return 2.0 * m.drift * s - a * s * s + m.signal_noise * m.signal_noise;
}

double rk4_step(const KalmanBucyModel& m, double s, double h) {
  const double k1 = riccati_rhs(m, s);
  const double k2 = riccati_rhs(m, s + 0.5 * h * k1);
  const double k3 = riccati_rhs(m, s + 0.5 * h * k2);
  const double k4 = riccati_rhs(m, s + h * k3);
  return s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool acceptable(double s, double tol) { return std::isfinite(s) && s >= -tol; }

struct PathAccumulator {
  std::vector<std::vector<Moments>> per_gain;  // [gain][time]
  std::vector<Moments> diff;                   // gain 1 minus gain 0, when two gains
};

PathAccumulator accumulate_paths(const KalmanBucyModel& model, std::size_t n_paths, std::uint64_t seed,
                                 unsigned threads, const std::vector<double>& gains) {
  model.validate();
  const RiccatiSolution riccati = solve_riccati(model);
  const std::size_t points = model.steps() + 1;
  const std::size_t chunks = (n_paths + kPathsPerChunk - 1) / kPathsPerChunk;
  std::vector<PathAccumulator> partial(chunks);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    PathAccumulator& acc = partial[c];
    acc.per_gain.assign(gains.size(), std::vector<Moments>(points));
    if (gains.size() == 2) acc.diff.assign(points, Moments{});
    std::vector<double> err0(points);
    const std::size_t end = std::min(n_paths, (c + 1) * kPathsPerChunk);
    for (std::size_t p = c * kPathsPerChunk; p < end; ++p) {
      const SimulatedPaths paths = simulate_paths(model, seed, p);
      for (std::size_t g = 0; g < gains.size(); ++g) {
        const auto est = filter_estimate(model, riccati, paths.obs_increments, gains[g]);
        for (std::size_t k = 0; k < points; ++k) {
          const double e = paths.state[k] - est[k];
          acc.per_gain[g][k].add(e * e);
          if (g == 0) {
            err0[k] = e * e;
          } else if (g == 1) {
            acc.diff[k].add(e * e - err0[k]);
          }
        }
      }
    }
  });
  PathAccumulator total;
  total.per_gain.assign(gains.size(), std::vector<Moments>(points));
  if (gains.size() == 2) total.diff.assign(points, Moments{});
  for (const auto& part : partial) {
    for (std::size_t g = 0; g < gains.size(); ++g) {
      for (std::size_t k = 0; k < points; ++k) total.per_gain[g][k].merge(part.per_gain[g][k]);
    }
    for (std::size_t k = 0; k < total.diff.size(); ++k) total.diff[k].merge(part.diff[k]);
  }
  return total;
}

MseCurve to_curve(const RiccatiSolution& riccati, const std::vector<Moments>& moments) {
  MseCurve curve;
  curve.times = riccati.times;
  curve.riccati = riccati.variance;
  for (const auto& m : moments) {
    curve.mse.push_back(m.mean);
    curve.stderr.push_back(m.stderr_of_mean());
  }
  return curve;
}

double max_deviation(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

}  // namespace

void KalmanBucyModel::validate() const {
  if (!(obs_noise > 0)) throw std::invalid_argument("observation noise D must be positive");
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  if (!(t_max >= dt)) throw std::invalid_argument("horizon must be at least one time step");
  if (!(s0 >= 0)) throw std::invalid_argument("initial error variance must be non-negative");
  for (double v : {drift, signal_noise, obs_gain, x0_mean}) {
    if (!std::isfinite(v)) throw std::invalid_argument("model coefficients must be finite");
  }
}

std::size_t KalmanBucyModel::steps() const {
  return static_cast<std::size_t>(std::max(1.0, std::round(t_max / dt)));
}

double KalmanBucyModel::step() const { return t_max / static_cast<double>(steps()); }

std::vector<double> KalmanBucyModel::grid() const {
  const std::size_t n = steps();
  const double h = step();
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = static_cast<double>(k) * h;
  t[n] = t_max;
  return t;
}

double stationary_variance(const KalmanBucyModel& m) {
  const double c2 = m.signal_noise * m.signal_noise;
  const double a = m.obs_gain * m.obs_gain / (m.obs_noise * m.obs_noise);
  if (a == 0.0) {
    if (m.drift < 0) return c2 / (-2.0 * m.drift);
    if (c2 == 0.0 && m.drift == 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return (m.drift + std::sqrt(m.drift * m.drift + a * c2)) / a;
}

RiccatiSolution solve_riccati(const KalmanBucyModel& model) {
  model.validate();
  RiccatiSolution sol;
  sol.times = model.grid();
  const double h = model.step();
  sol.variance.resize(sol.times.size());
  sol.variance[0] = model.s0;
  for (std::size_t k = 0; k + 1 < sol.times.size(); ++k) {
    const double s = sol.variance[k];
    double next = rk4_step(model, s, h);
    const double tol = 1e-12 * std::max(1.0, s);
    if (!acceptable(next, tol)) {
      bool ok = false;
      for (int halvings = 1; halvings <= kMaxHalvings && !ok; ++halvings) {
        const int substeps = 1 << halvings;
        const double sub = h / substeps;
        double cur = s;
        ok = true;
        for (int i = 0; i < substeps && ok; ++i) {
          cur = rk4_step(model, cur, sub);
          ok = acceptable(cur, tol);
          cur = std::max(cur, 0.0);
        }
        next = cur;
      }
      if (!ok) {
        throw StepTooLarge("Riccati step at t = " + std::to_string(sol.times[k]) +
                           " stays negative after " + std::to_string(kMaxHalvings) + " halvings");
      }
    }
    sol.variance[k + 1] = std::max(next, 0.0);
  }
  return sol;
}

SimulatedPaths simulate_paths(const KalmanBucyModel& model, std::uint64_t seed, std::uint64_t path_id) {
  model.validate();
  const std::size_t n = model.steps();
  const double h = model.step();
  const double sqrt_h = std::sqrt(h);
  Stream stream(seed, path_id);
  SimulatedPaths out;
  out.times = model.grid();
  out.state.resize(n + 1);
  out.obs_increments.resize(n);
  out.state[0] = model.x0_mean + std::sqrt(model.s0) * stream.normal();
  for (std::size_t k = 0; k < n; ++k) {
    const double signal_shock = stream.normal();
    const double obs_shock = stream.normal();
    const double x = out.state[k];
    out.obs_increments[k] = model.obs_gain * x * h + model.obs_noise * sqrt_h * obs_shock;
    out.state[k + 1] = x + model.drift * x * h + model.signal_noise * sqrt_h * signal_shock;
  }
  return out;
}

std::vector<double> filter_estimate(const KalmanBucyModel& model, const RiccatiSolution& riccati,
                                    std::span<const double> obs_increments, double gain_scale) {
  const std::size_t n = model.steps();
  if (obs_increments.size() != n || riccati.variance.size() != n + 1) {
    throw GridMismatch("observation increments (" + std::to_string(obs_increments.size()) +
                       ") and Riccati grid (" + std::to_string(riccati.variance.size()) +
                       ") do not match " + std::to_string(n) + " model steps");
  }
  const double h = model.step();
  const double d2 = model.obs_noise * model.obs_noise;
  std::vector<double> x(n + 1);
  x[0] = model.x0_mean;
  for (std::size_t k = 0; k < n; ++k) {
    const double gain = gain_scale * model.obs_gain * riccati.variance[k] / d2;
    x[k + 1] = x[k] + model.drift * x[k] * h + gain * (obs_increments[k] - model.obs_gain * x[k] * h);
  }
  return x;
}

FilterRun run_filter(const KalmanBucyModel& model, const RiccatiSolution& riccati,
                     const SimulatedPaths& paths, double gain_scale) {
  if (paths.state.size() != model.steps() + 1) throw GridMismatch("state path does not match the grid");
  FilterRun run;
  run.times = paths.times;
  run.state = paths.state;
  run.obs_increments = paths.obs_increments;
  run.estimate = filter_estimate(model, riccati, paths.obs_increments, gain_scale);
  run.squared_error.resize(run.state.size());
  for (std::size_t k = 0; k < run.state.size(); ++k) {
    const double e = run.state[k] - run.estimate[k];
    run.squared_error[k] = e * e;
  }
  return run;
}

std::vector<double> discrete_kalman_estimate(const KalmanBucyModel& model,
                                             std::span<const double> obs_increments) {
  const std::size_t n = model.steps();
  if (obs_increments.size() != n) throw GridMismatch("observation increments do not match the grid");
  const double h = model.step();
  const double a = 1.0 + model.drift * h;
  const double obs = model.obs_gain * h;
  const double q = model.signal_noise * model.signal_noise * h;
  const double r = model.obs_noise * model.obs_noise * h;
  std::vector<double> x(n + 1);
  x[0] = model.x0_mean;
  double p = model.s0;
  for (std::size_t k = 0; k < n; ++k) {
    const double innovation_var = obs * obs * p + r;
    const double gain = p * obs / innovation_var;
    const double updated = x[k] + gain * (obs_increments[k] - obs * x[k]);
    const double p_updated = (1.0 - gain * obs) * p;
    x[k + 1] = a * updated;
    p = a * a * p_updated + q;
  }
  return x;
}

MseCurve ensemble_mse(const KalmanBucyModel& model, std::size_t n_paths, std::uint64_t seed,
                      unsigned threads, double gain_scale) {
  if (n_paths < 100) throw std::invalid_argument("ensemble needs at least 100 paths");
  const PathAccumulator acc = accumulate_paths(model, n_paths, seed, threads, {gain_scale});
  return to_curve(solve_riccati(model), acc.per_gain[0]);
}

PairedMse ensemble_mse_paired(const KalmanBucyModel& model, std::size_t n_paths, double gain_scale,
                              std::uint64_t seed, unsigned threads) {
  if (n_paths < 100) throw std::invalid_argument("ensemble needs at least 100 paths");
  const PathAccumulator acc = accumulate_paths(model, n_paths, seed, threads, {1.0, gain_scale});
  const RiccatiSolution riccati = solve_riccati(model);
  PairedMse out{to_curve(riccati, acc.per_gain[0]), to_curve(riccati, acc.per_gain[1]), {}, {}};
  for (const auto& m : acc.diff) {
    out.diff_mean.push_back(m.mean);
    out.diff_stderr.push_back(m.stderr_of_mean());
  }
  return out;
}

CoupledDeviation coupled_discrete_deviation(const KalmanBucyModel& model, std::size_t n_paths,
                                            std::uint64_t seed) {
  if (n_paths == 0) throw std::invalid_argument("need at least one path");
  model.validate();
  KalmanBucyModel coarse = model;
  coarse.dt = model.step();
  KalmanBucyModel fine = coarse;
  fine.dt = coarse.dt / 2.0;
  const RiccatiSolution riccati_coarse = solve_riccati(coarse);
  const RiccatiSolution riccati_fine = solve_riccati(fine);
  CoupledDeviation out;
  for (std::size_t p = 0; p < n_paths; ++p) {
    const SimulatedPaths paths = simulate_paths(fine, seed, p);
    const auto& dy = paths.obs_increments;
    out.fine += max_deviation(filter_estimate(fine, riccati_fine, dy), discrete_kalman_estimate(fine, dy));
    std::vector<double> dy_coarse(coarse.steps());
    for (std::size_t k = 0; k < dy_coarse.size(); ++k) dy_coarse[k] = dy[2 * k] + dy[2 * k + 1];
    out.coarse += max_deviation(filter_estimate(coarse, riccati_coarse, dy_coarse),
                                discrete_kalman_estimate(coarse, dy_coarse));
  }
  out.coarse /= static_cast<double>(n_paths);
  out.fine /= static_cast<double>(n_paths);
  return out;
}

}  // namespace doob
