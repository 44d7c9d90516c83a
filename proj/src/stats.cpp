#include "lifshitz/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "lifshitz/error.hpp"

namespace lifshitz {

void RunningStats::add(double x) {
  ++count;
  double d = x - mean;
  mean += d / double(count);
  m2 += d * (x - mean);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  double n = double(count) + double(o.count);
  double d = o.mean - mean;
  mean += d * double(o.count) / n;
  m2 += o.m2 + d * d * double(count) * double(o.count) / n;
  count += o.count;
}

double RunningStats::variance() const { return count > 1 ? m2 / double(count - 1) : 0.0; }

double RunningStats::stderr_of_mean() const {
  return count > 1 ? std::sqrt(variance() / double(count)) : 0.0;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::span<const double> w) {
  if (x.size() != y.size() || (!w.empty() && w.size() != x.size()))
    throw InvalidArgument("fit_line: size mismatch");
  if (x.size() < 2) throw InvalidArgument("fit_line: need at least two points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) throw InvalidArgument("fit_line: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    double r = y[i] - f.intercept - f.slope * x[i];
    rss += wi * r * r;
  }
  std::size_t dof = x.size() > 2 ? x.size() - 2 : 1;
  // With supplied weights (inverse variances) the scale is known; otherwise estimate it.
  double scale = w.empty() ? rss / double(dof) : std::max(1.0, rss / double(dof));
  f.slope_stderr = std::sqrt(scale / sxx);
  f.intercept_stderr = std::sqrt(scale * (1.0 / sw + mx * mx / sxx));
  f.residual_rms = std::sqrt(rss / sw);
  return f;
}

void parallel_for_blocks(std::size_t blocks, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || blocks <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::size_t workers = std::min<std::size_t>(std::size_t(threads), blocks);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t b = t; b < blocks; b += workers) fn(b);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lifshitz
