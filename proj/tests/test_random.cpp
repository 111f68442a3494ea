#include "doobdynkin/parallel.hpp"
#include "doobdynkin/random.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <vector>

using namespace doob;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using W = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        W{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        W{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Stream a(1, 0), b(1, 0), c(1, 1), d(2, 0);
  for (int i = 0; i < 10; ++i) {
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
  }
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("uniform draws lie strictly inside the unit interval") {
  Stream s(kDefaultSeed, 3);
  Moments m;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    m.add(u);
  }
  CHECK(std::abs(m.mean - 0.5) < 3.0 * m.stderr_of_mean());
  CHECK(std::abs(m.variance() - 1.0 / 12.0) < 0.002);
}

TEST_CASE("normal and Laplace samplers pass a KS test") {
  Stream s(kDefaultSeed, 4);
  const std::size_t n = 20000;
  std::vector<double> xs(n), ls(n);
  for (auto& x : xs) x = s.normal();
  for (auto& x : ls) x = s.laplace();
  const double crit = 1.63 / std::sqrt(static_cast<double>(n));
  CHECK(oracle::ks_statistic(xs, oracle::normal_cdf) < crit);
  CHECK(oracle::ks_statistic(ls, [](double x) {
          return x < 0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
        }) < crit);
}

TEST_CASE("Moments merge equals sequential accumulation") {
  Stream s(5, 5);
  Moments all, left, right;
  for (int i = 0; i < 1000; ++i) {
    const double x = s.normal();
    all.add(x);
    (i < 400 ? left : right).add(x);
  }
  left.merge(right);
  CHECK(left.count == all.count);
  CHECK(left.mean == doctest::Approx(all.mean).epsilon(1e-12));
  CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("parallel_chunks visits every chunk and rethrows") {
  std::vector<int> hits(50, 0);
  parallel_chunks(hits.size(), 4, [&](std::size_t k) { hits[k] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_chunks(8, 3,
                                  [](std::size_t k) {
                                    if (k == 5) throw std::runtime_error("boom");
                                  }),
                  std::runtime_error);
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}
