#pragma once

#include "doobdynkin/random.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace doob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  std::optional<std::string> out;

  // factorize, condexp
  std::string space;
  std::string x;
  std::string y;
  std::string gamma;
  std::optional<std::string> extend;

  // project
  std::string samples;
  std::string basis;
  std::optional<double> ridge;
  bool min_norm = false;

  // risk
  std::string model;
  std::string phi;
  std::vector<double> truncations;
  std::size_t mc_samples = 100000;

  // fiducial-demo
  double y_obs = 2.5;
  std::string noise = "normal";
  std::string psi = "identity";

  // kalman-demo
  double f = 0.0;
  double c = 1.0;
  double g = 1.0;
  double d = 1.0;
  double s0 = 0.0;
  double x0 = 0.0;
  double tmax = 2.0;
  double dt = 1e-3;
  std::size_t paths = 10000;
  double gain_scale = 1.0;
};

struct ParseOutcome {
  std::optional<RunConfig> config;  // empty when the process should exit
  int exit_code = kExitOk;
};

/// Usage errors print a diagnostic and usage text to `err` and yield
/// kExitUsage; --help prints to `out` and yields kExitOk.
ParseOutcome parse_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes the report to config.out (atomically) or to `out`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// "0x..." is hexadecimal, anything else decimal.
std::uint64_t parse_seed(const std::string& text);

/// Comma-separated, positive and strictly increasing.
std::vector<double> parse_truncations(const std::string& text);

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace doob::cli
