#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace hawkes {

struct MonteCarloSummary {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_half_width = 0.0;  // 1.96 std_error
  std::size_t n_replicas = 0;
  std::uint64_t seed = 0;
  double elapsed = 0.0;  // wall seconds

  // Sample mean of per-replica values, accumulated in index order.
  static MonteCarloSummary from_samples(std::span<const double> xs, std::uint64_t seed,
                                        double elapsed = 0.0) {
    MonteCarloSummary s;
    s.n_replicas = xs.size();
    s.seed = seed;
    s.elapsed = elapsed;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
    s.estimate = mean;
    s.std_error = std::sqrt(var / static_cast<double>(xs.size()));
    s.ci_half_width = 1.96 * s.std_error;
    return s;
  }

  double z_score(double truth) const {
    if (std_error == 0.0) return estimate == truth ? 0.0 : INFINITY;
    return (estimate - truth) / std_error;
  }

  bool covers(double truth) const { return std::abs(estimate - truth) <= ci_half_width; }
};

}  // namespace hawkes
