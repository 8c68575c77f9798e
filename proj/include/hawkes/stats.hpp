#pragma once

// Small statistics kit used by the experiments and tests.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "hawkes/error.hpp"

namespace hawkes::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Unbiased sample variance.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

struct Shape {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double skewness_se = 0.0;  // sqrt(6/n)
  double kurtosis_se = 0.0;  // sqrt(24/n)
};

inline Shape shape(std::span<const double> xs) {
  Shape s;
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 4) return s;
  const double m = mean(xs);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : xs) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.skewness = m3 / std::pow(m2, 1.5);
  s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  s.skewness_se = std::sqrt(6.0 / n);
  s.kurtosis_se = std::sqrt(24.0 / n);
  return s;
}

// Kolmogorov distribution: P(sup|B| > x) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}.
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value and the
// Stephens small-sample correction. Ties are handled by stepping both
// empirical CDFs past equal values together.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

template <typename Cdf>
KsResult ks_one_sample(std::vector<double> xs, const Cdf& cdf) {
  if (xs.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sq = std::sqrt(n);
  return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Pearson goodness of fit; `expected` holds probabilities summing to 1.
inline ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected_prob,
                                      int fitted_params = 0) {
  if (observed.size() != expected_prob.size() || observed.size() < 2) {
    throw DomainError("chi_square_gof: mismatched or too few bins");
  }
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = n * expected_prob[i];
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
  }
  r.dof = static_cast<double>(observed.size()) - 1.0 - fitted_params;
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

// Ordinary least squares y = intercept + slope x.
inline LineFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2) / sxx);
  }
  return f;
}

}  // namespace hawkes::stats
