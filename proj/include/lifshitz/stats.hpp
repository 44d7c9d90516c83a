#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lifshitz {

// Welford accumulator with exact merge; merge order is fixed by the caller.
struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const RunningStats& other);
  double variance() const;
  double stderr_of_mean() const;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double residual_rms = 0.0;
};

// Weighted least squares y = intercept + slope*x. Empty weights means unit weights.
LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::span<const double> weights = {});

// Runs fn(block) for block in [0, blocks) on up to `threads` workers.
// Callers write block results into preallocated slots and reduce in order.
void parallel_for_blocks(std::size_t blocks, int threads,
                         const std::function<void(std::size_t)>& fn);

}  // namespace lifshitz
