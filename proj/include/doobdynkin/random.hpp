#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace doob {

/// Default seed used whenever a caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 0xD00BD00BULL;

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to derive sub-seeds from (seed, tag) pairs.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// A counter-based random stream keyed by (seed, task).
///
/// Draw i of stream (seed, task) is a pure function of (seed, task, i), so
/// any partition of work into tasks reproduces bit-for-bit regardless of
/// which thread runs which task. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t task);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  /// Laplace(0, 1) via inverse CDF.
  double laplace();

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t task_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace doob
