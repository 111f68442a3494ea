#pragma once

#include "doobdynkin/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace doob {

/// One-dimensional linear filtering problem
///
///   dGamma = F Gamma dt + C dU,   dY = G Gamma dt + D dV,
///
/// with Gamma_0 ~ N(x0_mean, s0) and independent Brownian motions U, V.
struct KalmanBucyModel {
  double drift = 0.0;         // F
  double signal_noise = 1.0;  // C
  double obs_gain = 1.0;      // G
  double obs_noise = 1.0;     // D
  double s0 = 0.0;
  double x0_mean = 0.0;
  double t_max = 1.0;
  double dt = 1e-3;

  /// Throws std::invalid_argument unless D > 0, dt > 0, t_max >= dt, s0 >= 0.
  void validate() const;
  /// Number of grid steps; the step is t_max / steps().
  std::size_t steps() const;
  double step() const;
  std::vector<double> grid() const;
};

/// Nonnegative root of 2 F S - (G/D)^2 S^2 + C^2 = 0 (+inf if none).
double stationary_variance(const KalmanBucyModel& model);

struct RiccatiSolution {
  std::vector<double> times;
  std::vector<double> variance;  // S(t)
};

/// RK4 on S' = 2 F S - (G/D)^2 S^2 + C^2, S(0) = s0, over the model grid.
/// Steps that would leave S < 0 are retried with halved substeps; throws
/// StepTooLarge when that does not help.
RiccatiSolution solve_riccati(const KalmanBucyModel& model);

struct SimulatedPaths {
  std::vector<double> times;
  std::vector<double> state;            // Gamma at each grid time
  std::vector<double> obs_increments;   // Y(t_{k+1}) - Y(t_k), one per step
};

/// Euler-Maruyama paths; path `path_id` of stream `seed`.
SimulatedPaths simulate_paths(const KalmanBucyModel& model, std::uint64_t seed, std::uint64_t path_id = 0);

/// dX = F X dt + K (dY - G X dt), K = gain_scale * G S / D^2, X_0 = x0_mean.
/// gain_scale = 1 is the Kalman-Bucy filter.
std::vector<double> filter_estimate(const KalmanBucyModel& model, const RiccatiSolution& riccati,
                                    std::span<const double> obs_increments, double gain_scale = 1.0);

struct FilterRun {
  std::vector<double> times;
  std::vector<double> state;
  std::vector<double> obs_increments;
  std::vector<double> estimate;
  std::vector<double> squared_error;
};

FilterRun run_filter(const KalmanBucyModel& model, const RiccatiSolution& riccati,
                     const SimulatedPaths& paths, double gain_scale = 1.0);

/// Discrete-time Kalman predictions for the sampled system
///   x_{k+1} = (1 + F dt) x_k + noise(C^2 dt),  z_k = G dt x_k + noise(D^2 dt),
/// where z_k are the observation increments; entry k+1 estimates Gamma at
/// t_{k+1} from z_0..z_k.
std::vector<double> discrete_kalman_estimate(const KalmanBucyModel& model,
                                             std::span<const double> obs_increments);

struct MseCurve {
  std::vector<double> times;
  std::vector<double> mse;
  std::vector<double> stderr;
  std::vector<double> riccati;
};

/// Empirical E(Gamma_t - X_t)^2 over n_paths simulated paths, next to S(t).
MseCurve ensemble_mse(const KalmanBucyModel& model, std::size_t n_paths, std::uint64_t seed,
                      unsigned threads = 0, double gain_scale = 1.0);

struct PairedMse {
  MseCurve optimal;
  MseCurve scaled;
  std::vector<double> diff_mean;    // scaled - optimal, pathwise
  std::vector<double> diff_stderr;
};

/// Optimal and gain-scaled filters on the same simulated paths.
PairedMse ensemble_mse_paired(const KalmanBucyModel& model, std::size_t n_paths, double gain_scale,
                              std::uint64_t seed, unsigned threads = 0);

struct CoupledDeviation {
  double coarse = 0.0;  // mean over paths of max |X_cont - X_disc| at step dt
  double fine = 0.0;    // same at step dt / 2, on the same observation paths
  double ratio() const { return fine / coarse; }
};

/// Continuous filter against the discrete Kalman oracle at dt and dt/2,
/// the coarse observation increments being sums of the fine ones.
CoupledDeviation coupled_discrete_deviation(const KalmanBucyModel& model, std::size_t n_paths,
                                            std::uint64_t seed);

}  // namespace doob
