#pragma once

#include <cstddef>
#include <functional>

namespace doob {

/// 0 means "use the hardware concurrency".
unsigned resolve_threads(unsigned requested);

/// Calls body(chunk) for every chunk in [0, chunks) on up to `threads`
/// workers. Callers write results into per-chunk slots and reduce them in
/// chunk order afterwards, so output does not depend on the worker count.
/// The first exception thrown by any chunk is rethrown.
void parallel_chunks(std::size_t chunks, unsigned threads,
                     const std::function<void(std::size_t)>& body);

/// Running mean and centred second moment, mergeable in a fixed order.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const Moments& other);
  double variance() const;  // unbiased
  double stderr_of_mean() const;
};

}  // namespace doob
