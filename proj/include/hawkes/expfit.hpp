#pragma once

// Sum-of-exponentials approximation of a decreasing kernel: decay rates on
// a fixed geometric grid, nonnegative coefficients by Lawson-Hanson NNLS.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hawkes/error.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/quadrature.hpp"

namespace hawkes::analysis {

// Lawson-Hanson active-set solver for min |A x - y|_2 subject to x >= 0.
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, int max_iter = 500) {
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, A.norm() * y.norm());

  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) if (passive[j]) idx.push_back(j);
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
    const Eigen::VectorXd sp = Ap.colPivHouseholderQr().solve(y);
    s.setZero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) s(idx[c]) = sp(static_cast<Eigen::Index>(c));
  };

  Eigen::VectorXd w = A.transpose() * (y - A * x);
  for (int outer = 0; outer < max_iter; ++outer) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    Eigen::VectorXd s;
    for (int inner = 0; inner < max_iter; ++inner) {
      solve_passive(s);
      double min_s = INFINITY;
      for (Eigen::Index j = 0; j < n; ++j) if (passive[j]) min_s = std::min(min_s, s(j));
      if (min_s > 0.0) break;
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && s(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - s(j)));
      }
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && x(j) <= 1e-15) {
          passive[j] = false;
          x(j) = 0.0;
        }
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) x(j) = passive[j] ? s(j) : 0.0;
    w = A.transpose() * (y - A * x);
  }
  return x;
}

struct ExpSumFit {
  std::vector<ExpTerm> terms;
  double linf_error = 0.0;
  double l1_error = 0.0;
  double fit_horizon = 0.0;
  // The unconstrained least-squares fit on the same grid had negative
  // coefficients; `terms` is the best nonnegative fit instead.
  bool nonnegativity_active = false;

  Kernel kernel() const { return Kernel::sum_exp(terms); }
};

struct ExpFitErrors {
  double linf = 0.0;
  double l1 = 0.0;
};

inline double sum_exp_value(const std::vector<ExpTerm>& terms, double t) {
  double s = 0.0;
  for (const auto& term : terms) s += term.a * std::exp(-term.b * t);
  return s;
}

// L-infinity error on a uniform check grid over [0, horizon] and L1 error
// by the trapezoid rule on the same grid.
inline ExpFitErrors fit_errors(const Kernel& k, const std::vector<ExpTerm>& terms, double horizon,
                               int check_points = 20001) {
  ExpFitErrors e;
  double prev = 0.0;
  const double dt = horizon / (check_points - 1);
  for (int i = 0; i < check_points; ++i) {
    const double t = i * dt;
    const double d = std::abs(k.value_unchecked(t) - sum_exp_value(terms, t));
    e.linf = std::max(e.linf, d);
    if (i > 0) e.l1 += 0.5 * (prev + d) * dt;
    prev = d;
  }
  return e;
}

// Geometric decay-rate grid on [b_min, b_max]; grids with n = 2^j + 1 points
// are nested.
inline std::vector<double> decay_grid(int n, double b_min, double b_max) {
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = b_min;
    return g;
  }
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = b_min * std::pow(b_max / b_min, double(i) / (n - 1));
  return g;
}

struct ExpFitOptions {
  std::optional<double> b_min;
  std::optional<double> b_max;
  int sample_points = 400;
};

inline ExpSumFit fit_sum_exp(const Kernel& k, int n_terms, double horizon, const ExpFitOptions& opt = {}) {
  if (n_terms < 1) throw DomainError("fit_sum_exp: n_terms must be >= 1");
  if (!(horizon > 0.0)) throw DomainError("fit_sum_exp: horizon must be > 0");
  if (!k.is_decreasing()) throw DomainError("fit_sum_exp: kernel must be decreasing");
  const double h0 = k.at_zero();
  const double mass = std::isfinite(k.l1_norm()) ? k.l1_norm() : k.tail(0.0) - 0.0;
  if (!std::isfinite(mass)) throw DomainError("fit_sum_exp: kernel must be integrable");

  ExpSumFit fit;
  fit.fit_horizon = horizon;
  if (h0 == 0.0) {
    fit.terms = {{0.0, 1.0}};
    const auto e = fit_errors(k, fit.terms, horizon);
    fit.linf_error = e.linf;
    fit.l1_error = e.l1;
    return fit;
  }

  // A single term matches h(0) and |h|_1, which is exact for one exponential.
  const double natural_rate = h0 / mass;
  std::vector<double> rates;
  if (n_terms == 1) {
    rates = {natural_rate};
  } else {
    const double lo = opt.b_min.value_or(1.0 / horizon);
    const double hi = opt.b_max.value_or(10.0 * natural_rate);
    rates = decay_grid(n_terms, lo, std::max(hi, 2.0 * lo));
  }

  // Sample times: t = 0 plus a log-spaced grid on [1e-4 horizon, horizon].
  const int m = std::max(opt.sample_points, 2 * n_terms + 2);
  std::vector<double> ts(static_cast<std::size_t>(m));
  ts[0] = 0.0;
  const double t_lo = 1e-4 * horizon;
  for (int j = 1; j < m; ++j) ts[static_cast<std::size_t>(j)] = t_lo * std::pow(horizon / t_lo, double(j - 1) / (m - 2));

  Eigen::MatrixXd A(m, n_terms);
  Eigen::VectorXd y(m);
  for (int j = 0; j < m; ++j) {
    y(j) = k.value_unchecked(ts[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n_terms; ++i) A(j, i) = std::exp(-rates[static_cast<std::size_t>(i)] * ts[static_cast<std::size_t>(j)]);
  }

  const Eigen::VectorXd unconstrained = A.colPivHouseholderQr().solve(y);
  fit.nonnegativity_active = (unconstrained.array() < 0.0).any();
  const Eigen::VectorXd coef = nnls(A, y);

  for (int i = 0; i < n_terms; ++i) fit.terms.push_back({coef(i), rates[static_cast<std::size_t>(i)]});
  const auto e = fit_errors(k, fit.terms, horizon);
  fit.linf_error = e.linf;
  fit.l1_error = e.l1;
  return fit;
}

}  // namespace hawkes::analysis
