#pragma once

// Maximum likelihood for lambda_t = nu + a sum_i e^{-b (t - tau_i)}.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hawkes/error.hpp"
#include "hawkes/event_stream.hpp"

namespace hawkes::calibrate {

struct ExpParams {
  double nu = 1.0;
  double a = 0.5;
  double b = 1.0;
};

struct LoglikGradient {
  double value = 0.0;
  double d_nu = 0.0;
  double d_a = 0.0;
  double d_b = 0.0;
};

namespace detail {

inline void check_params(double nu, double a, double b) {
  if (!(nu > 0.0) || !(a >= 0.0) || !(b > 0.0) || !std::isfinite(nu) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("loglik_exp: needs nu > 0, a >= 0, b > 0");
  }
}

}  // namespace detail

// sum_i log lambda(tau_i) - int_start^T lambda over the window [start, T),
// with no history before `start`. Uses the recursion
// R_i = e^{-b (tau_i - tau_{i-1})} (1 + R_{i-1}) and lambda(tau_i) = nu + a R_i.
inline LoglikGradient loglik_exp_gradient(const EventStream& s, double nu, double a, double b, double start = 0.0) {
  detail::check_params(nu, a, b);
  const auto& t = s.times();
  const double T = s.horizon();
  if (!(start <= T) || (!t.empty() && t.front() < start)) throw DomainError("loglik_exp: events before the window start");
  LoglikGradient g;
  double r = 0.0, dr = 0.0;  // R_i and dR_i/db
  double prev = 0.0;
  double log_sum = 0.0, comp = 0.0, dcomp_b = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) {
      const double dt = t[i] - prev;
      const double e = std::exp(-b * dt);
      const double r_new = e * (1.0 + r);
      dr = e * dr - dt * r_new;
      r = r_new;
    }
    prev = t[i];
    const double lam = nu + a * r;
    log_sum += std::log(lam);
    g.d_nu += 1.0 / lam;
    g.d_a += r / lam;
    g.d_b += a * dr / lam;
    const double rest = T - t[i];
    const double e = std::exp(-b * rest);
    comp += -std::expm1(-b * rest);
    dcomp_b += -(a / (b * b)) * -std::expm1(-b * rest) + (a / b) * rest * e;
  }
  g.value = log_sum - nu * (T - start) - (a / b) * comp;
  g.d_nu -= T - start;
  g.d_a -= comp / b;
  g.d_b -= dcomp_b;
  return g;
}

inline double loglik_exp(const EventStream& s, double nu, double a, double b, double start = 0.0) {
  return loglik_exp_gradient(s, nu, a, b, start).value;
}

inline double loglik_exp(const EventStream& s, const ExpParams& p) { return loglik_exp(s, p.nu, p.a, p.b); }

// ---------------------------------------------------------------------------

struct NelderMeadResult {
  std::array<double, 3> x{};
  double value = 0.0;  // minimum
  bool converged = false;
  int iterations = 0;
};

// Minimises f over R^3. Converged once the spread of the simplex values
// stays below ftol (1 + |f_best|) for n + 1 consecutive iterations.
inline NelderMeadResult nelder_mead(const std::function<double(const std::array<double, 3>&)>& f,
                                    std::array<double, 3> x0, double step = 0.5, double ftol = 1e-8,
                                    int max_iter = 5000) {
  constexpr int n = 3;
  std::array<std::array<double, 3>, n + 1> p;
  std::array<double, n + 1> v;
  p[0] = x0;
  for (int i = 0; i < n; ++i) {
    p[i + 1] = x0;
    p[i + 1][i] += step;
  }
  for (int i = 0; i <= n; ++i) v[i] = f(p[i]);
  NelderMeadResult res;
  int quiet = 0;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    std::array<int, n + 1> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return v[i] < v[j]; });
    const int best = idx[0], worst = idx[n], second = idx[n - 1];
    if (v[worst] - v[best] <= ftol * (1.0 + std::abs(v[best]))) {
      if (++quiet > n) {
        res.converged = true;
        break;
      }
    } else {
      quiet = 0;
    }
    std::array<double, 3> c{};
    for (int i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (int d = 0; d < n; ++d) c[d] += p[i][d] / n;
    }
    auto along = [&](double coef) {
      std::array<double, 3> y;
      for (int d = 0; d < n; ++d) y[d] = c[d] + coef * (p[worst][d] - c[d]);
      return y;
    };
    const auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr < v[best]) {
      const auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) p[worst] = xe, v[worst] = fe;
      else p[worst] = xr, v[worst] = fr;
      continue;
    }
    if (fr < v[second]) {
      p[worst] = xr, v[worst] = fr;
      continue;
    }
    const bool outside = fr < v[worst];
    const auto xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : v[worst])) {
      p[worst] = xc, v[worst] = fc;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (int d = 0; d < n; ++d) p[i][d] = p[best][d] + 0.5 * (p[i][d] - p[best][d]);
      v[i] = f(p[i]);
    }
  }
  const int best = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  res.x = p[best];
  res.value = v[best];
  return res;
}

// ---------------------------------------------------------------------------

struct FitResult {
  ExpParams params;
  double loglik = 0.0;
  double loglik_init = 0.0;
  std::size_t n_events = 0;
  bool converged = false;
  int iterations = 0;
};

// Simplex search on (log nu, log a, log b) from `init` and two fixed
// alternatives scaled to the empirical rate; each start is restarted once
// from its optimum. The best converged run wins. Decay rates above
// 1e3 times the event rate are not resolvable from the data and are excluded.
inline FitResult fit_exp(const EventStream& s, std::optional<ExpParams> init = std::nullopt) {
  if (s.size() < 10) throw DomainError("fit_exp: needs at least 10 events");
  if (!(s.horizon() > 0.0)) throw DomainError("fit_exp: needs a positive horizon");
  const double rate = static_cast<double>(s.size()) / s.horizon();
  const ExpParams first = init.value_or(ExpParams{0.5 * rate, 0.5, 1.0});
  detail::check_params(first.nu, first.a, first.b);
  if (!(first.a > 0.0)) throw DomainError("fit_exp: initial a must be > 0 for the log parameterisation");
  const std::array<ExpParams, 3> starts{first, ExpParams{0.8 * rate, 0.1, 0.5}, ExpParams{0.3 * rate, 1.5, 3.0}};

  const double b_max = 1e3 * rate;
  auto objective = [&](const std::array<double, 3>& x) {
    const double nu = std::exp(x[0]), a = std::exp(x[1]), b = std::exp(x[2]);
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!(nu > 0.0 && b > 0.0) || b > b_max || !std::isfinite(nu) || !std::isfinite(a) || !std::isfinite(b)) return inf;
    const double v = loglik_exp(s, nu, a, b);
    return std::isfinite(v) ? -v : inf;
  };

  FitResult out;
  out.n_events = s.size();
  out.loglik_init = loglik_exp(s, first);
  std::optional<NelderMeadResult> pick;
  for (const auto& p0 : starts) {
    std::array<double, 3> x{std::log(p0.nu), std::log(p0.a), std::log(p0.b)};
    auto r = nelder_mead(objective, x);
    auto again = nelder_mead(objective, r.x, 0.1);
    out.iterations += r.iterations + again.iterations;
    if (again.value > r.value) again.x = r.x, again.value = r.value;
    const bool better = !pick || (again.converged && !pick->converged) ||
                        (again.converged == pick->converged && again.value < pick->value);
    if (better) pick = again;
  }
  const double best = pick->value;
  out.converged = pick->converged;
  out.params = {std::exp(pick->x[0]), std::exp(pick->x[1]), std::exp(pick->x[2])};
  out.loglik = -best;
  if (out.loglik < out.loglik_init) {
    out.params = first;
    out.loglik = out.loglik_init;
  }
  return out;
}

}  // namespace hawkes::calibrate
