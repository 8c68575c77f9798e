#pragma once

// Adaptive Gauss-Kronrod (G7/K15) quadrature and a fixed 64-point
// Gauss-Legendre rule.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace hawkes::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
Result gk15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * fsum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * fsum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half), 15};
}

}  // namespace detail

// Integrates f over [a, b] to absolute tolerance `abs_tol` (or relative
// tolerance `rel_tol` of the running estimate, whichever is looser) by
// bisecting the interval with the largest error estimate.
template <typename F>
Result integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                 double rel_tol = 1e-12, int max_intervals = 4000) {
  if (a == b) return {};
  struct Piece {
    double a, b;
    Result r;
    bool operator<(const Piece& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Piece> heap;
  Result first = detail::gk15(f, a, b);
  heap.push({a, b, first});
  double total = first.value;
  double error = first.error;
  int evals = first.evaluations;
  int intervals = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(total)) && intervals < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    Result left = detail::gk15(f, worst.a, mid);
    Result right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.r.value;
    error += left.error + right.error - worst.r.error;
    evals += left.evaluations + right.evaluations;
    heap.push({worst.a, mid, left});
    heap.push({mid, worst.b, right});
    ++intervals;
  }
  // Re-sum to shed the cancellation accumulated by the running updates.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().r.value;
    err += heap.top().r.error;
    heap.pop();
  }
  return {sum, err, evals};
}

// Integral over [a, inf) through the map t = a + x / (1 - x), x in [0, 1).
template <typename F>
Result integrate_to_infinity(const F& f, double a, double abs_tol = 1e-10,
                             double rel_tol = 1e-12) {
  auto g = [&](double x) {
    const double one_minus = 1.0 - x;
    if (one_minus <= 0.0) return 0.0;
    const double t = a + x / one_minus;
    const double v = f(t) / (one_minus * one_minus);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol, 20000);
}

// 64-point Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
// iteration on the Legendre polynomial.
struct GaussLegendre64 {
  std::array<double, 64> nodes{};
  std::array<double, 64> weights{};

  GaussLegendre64() {
    constexpr int n = 64;
    for (int i = 0; i < n / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
  }

  static const GaussLegendre64& instance() {
    static const GaussLegendre64 rule;
    return rule;
  }

  template <typename F>
  double integrate(const F& f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 64; ++i) s += weights[i] * f(c + h * nodes[i]);
    return s * h;
  }
};

}  // namespace hawkes::quad
