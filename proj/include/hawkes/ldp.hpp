#pragma once

// Moment generating functions and large/moderate deviation rate functions
// for linear and marked Hawkes processes.
//
// Notation: M(s) = E[e^{s H}] for the law of H(a), K(theta) = e^theta
// (counting) or E[e^{theta C}] (claim-weighted). f(theta) is the minimal
// root of x = K(theta) M(x - 1) and Gamma(theta) = nu (f(theta) - 1).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hawkes/analysis.hpp"
#include "hawkes/error.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/marks.hpp"
#include "hawkes/roots.hpp"

namespace hawkes::ldp {

// ---------------------------------------------------------------------------
// Renewal-type fixed point for E[e^{theta N_t}] with a general kernel.

struct MgfOptions {
  double grid_step = 0.01;
  bool richardson_check = false;
};

struct MgfResult {
  double log_mgf = 0.0;  // log E[e^{theta N_t}]
  double log_mgf_half_step = 0.0;
  double richardson_change = 0.0;  // relative change when the step is halved
};

namespace detail {

// Largest theta for which the minimal solution F exists: |h|_1 - 1 - log |h|_1.
inline double renewal_theta_max(double l1) {
  if (l1 == 0.0) return kInf;
  if (!(l1 < 1.0)) return 0.0;
  return l1 - 1.0 - std::log(l1);
}

inline double renewal_log_mgf(double nu, const Kernel& k, double theta, double t, double step) {
  if (t == 0.0 || theta == 0.0 || nu == 0.0) return 0.0;
  const auto n = static_cast<std::size_t>(std::ceil(t / step - 1e-9));
  const double dt = t / static_cast<double>(n);
  const double l1 = k.l1_norm();
  const double x_cap = l1 > 0.0 ? 1.0 / l1 : kInf;  // minimal solutions stay below 1/|h|_1
  // Kernel on the grid, cut where it no longer matters.
  const double cut = analysis::truncation_point(k, 1e-17);
  const std::size_t width = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(cut / dt)) + 1);
  std::vector<double> hg(width + 1);
  for (std::size_t j = 0; j <= width; ++j) hg[j] = k.value_unchecked(static_cast<double>(j) * dt);

  std::vector<double> g(n + 1, 0.0);  // F - 1 on the grid
  g[0] = std::expm1(theta);
  double integral = 0.5 * g[0];
  const double b = 0.5 * dt * hg[0];
  for (std::size_t i = 1; i <= n; ++i) {
    // int_0^{s_i} h(u) (F(s_i - u) - 1) du by the trapezoid rule; the u = 0
    // node involves the unknown F(s_i).
    double c = 0.0;
    const std::size_t jmax = std::min(i, width);
    for (std::size_t j = 1; j < jmax; ++j) c += hg[j] * g[i - j];
    if (jmax == i) c += 0.5 * hg[i] * g[0];
    else c += hg[jmax] * g[i - jmax];
    c *= dt;
    // Solve y = e^{theta + c + b y} - 1 for the minimal y by Newton from
    // below (the map is convex and increasing).
    const double a = theta + c;
    double y = std::expm1(a + b * g[i - 1]);
    for (int it = 0; it < 60; ++it) {
      const double e = std::exp(a + b * y);
      const double r = e - 1.0 - y;
      const double d = b * e - 1.0;
      if (d >= 0.0) throw RegimeError("mgf_renewal: fixed point lost (theta beyond the critical value)");
      const double next = y - r / d;
      if (std::abs(next - y) <= 1e-15 * (1.0 + std::abs(y))) {
        y = next;
        break;
      }
      y = next;
    }
    if (!std::isfinite(y) || 1.0 + y > x_cap * (1.0 + 1e-6) + 1e-9) {
      throw RegimeError("mgf_renewal: F left the minimal-solution bracket");
    }
    g[i] = y;
    integral += (i == n ? 0.5 : 1.0) * y;
  }
  return nu * integral * dt;
}

}  // namespace detail

// log E[e^{theta N_t}] = nu int_0^t (F(s) - 1) ds with
// F(s) = exp(theta + int_0^s h(u) (F(s - u) - 1) du).
inline MgfResult mgf_renewal(double nu, const Kernel& k, double theta, double t, const MgfOptions& opt = {}) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("mgf_renewal: t must be finite and >= 0");
  if (!(opt.grid_step > 0.0)) throw DomainError("mgf_renewal: grid step must be positive");
  if (!(nu >= 0.0)) throw DomainError("mgf_renewal: nu must be >= 0");
  const double l1 = k.l1_norm();
  if (l1 >= 1.0) throw RegimeError("mgf_renewal: needs |h|_1 < 1");
  if (theta > detail::renewal_theta_max(l1)) {
    throw DomainError("mgf_renewal: theta beyond |h|_1 - 1 - log |h|_1");
  }
  MgfResult r;
  r.log_mgf = detail::renewal_log_mgf(nu, k, theta, t, opt.grid_step);
  if (opt.richardson_check) {
    r.log_mgf_half_step = detail::renewal_log_mgf(nu, k, theta, t, 0.5 * opt.grid_step);
    r.richardson_change = r.log_mgf == 0.0 ? 0.0 : std::abs(r.log_mgf_half_step / r.log_mgf - 1.0);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Marked fixed point.

class FixedPointModel {
 public:
  explicit FixedPointModel(NonnegLaw h_law, std::optional<NonnegLaw> claim = std::nullopt)
      : h_(std::move(h_law)), claim_(std::move(claim)) {
    if (!(h_.mean() < 1.0)) throw RegimeError("marked model needs E[H(a)] < 1");
  }

  const NonnegLaw& h_law() const { return h_; }
  const std::optional<NonnegLaw>& claim_law() const { return claim_; }

  double M(double s) const { return h_.mgf(s); }
  double dM(double s) const { return h_.mgf_prime(s); }

  // K(theta) and d log K / d theta.
  double K(double theta) const { return claim_ ? claim_->mgf(theta) : std::exp(theta); }
  double dlogK(double theta) const { return claim_ ? claim_->mgf_prime(theta) / claim_->mgf(theta) : 1.0; }
  double log_K(double theta) const { return claim_ ? std::log(claim_->mgf(theta)) : theta; }

  // Upper end of the x range on which M(x - 1) is finite.
  double x_max() const { return 1.0 + h_.mgf_abscissa(); }

 private:
  NonnegLaw h_;
  std::optional<NonnegLaw> claim_;
};

struct CriticalPoint {
  double theta_c = kInf;
  double x_c = kInf;
  bool finite = false;
};

// x_c > 1 solves x M'(x - 1) = M(x - 1); theta_c solves K(theta_c) M'(x_c - 1) = 1.
inline CriticalPoint critical_point(const FixedPointModel& m) {
  CriticalPoint cp;
  auto phi = [&](double x) { return x * m.dM(x - 1.0) - m.M(x - 1.0); };
  double hi;
  const double xmax = m.x_max();
  if (std::isfinite(xmax)) {
    // phi -> +inf at the abscissa for the exponential law.
    double gap = 0.5 * (xmax - 1.0);
    hi = xmax - gap;
    while (!(phi(hi) > 0.0)) {
      gap *= 0.5;
      hi = xmax - gap;
      if (gap < 1e-15 * xmax) return cp;
    }
  } else {
    hi = 2.0;
    while (!(phi(hi) > 0.0)) {
      hi *= 2.0;
      if (!std::isfinite(phi(hi)) || hi > 1e300) return cp;
    }
  }
  const double x_c = roots::bisect(phi, 1.0, hi, 1e-14);
  auto dphi = [&](double x) { return x * m.h_law().mgf_second(x - 1.0); };
  cp.x_c = roots::polish(phi, dphi, x_c, 1.0, hi, 2);
  const double target = 1.0 / m.dM(cp.x_c - 1.0);
  if (!m.claim_law()) {
    cp.theta_c = std::log(target);
  } else {
    // K is increasing on [0, abscissa); K(0) = 1 < target.
    const double ab = m.claim_law()->mgf_abscissa();
    double hi_t = std::isfinite(ab) ? ab : 1.0;
    if (std::isfinite(ab)) {
      double gap = 0.5 * ab;
      while (!(m.K(ab - gap) > target)) {
        gap *= 0.5;
        if (gap < 1e-15 * ab) throw NumericalError("critical_point: claim transform bracket failed");
      }
      hi_t = ab - gap;
    } else {
      while (!(m.K(hi_t) > target)) hi_t *= 2.0;
    }
    auto fk = [&](double th) { return m.K(th) - target; };
    const double th = roots::bisect(fk, 0.0, hi_t, 1e-14);
    auto dk = [&](double t) { return m.claim_law()->mgf_prime(t); };
    cp.theta_c = roots::polish(fk, dk, th, 0.0, hi_t, 2);
  }
  cp.finite = true;
  return cp;
}

inline CriticalPoint critical_point(const NonnegLaw& h_law) { return critical_point(FixedPointModel(h_law)); }

struct FixedPoint {
  double x = 1.0;
  bool finite = true;  // false when theta > theta_c
  int iterations = 0;
};

// Minimal root of x = K(theta) M(x - 1). A short monotone iteration from
// x = 1 (whose monotonicity is asserted) brackets the root from the inside;
// bisection on [x_iter, x_c] (or [0, x_iter] when theta < 0) then finishes.
inline FixedPoint marked_fixed_point(const FixedPointModel& m, double theta, const CriticalPoint& cp,
                                     int max_iterations = 50) {
  FixedPoint fp;
  if (theta == 0.0) return fp;
  if (cp.finite && theta > cp.theta_c) {
    fp.finite = false;
    fp.x = kInf;
    return fp;
  }
  const double K = m.K(theta);
  if (!std::isfinite(K)) {
    fp.finite = false;
    fp.x = kInf;
    return fp;
  }
  auto G = [&](double x) { return K * m.M(x - 1.0) - x; };
  const bool up = theta > 0.0;
  double x = 1.0;
  for (int i = 0; i < max_iterations; ++i) {
    const double next = K * m.M(x - 1.0);
    if (up ? next < x : next > x) throw NumericalError("marked fixed point: iteration lost monotonicity");
    fp.iterations = i + 1;
    if (std::abs(next - x) <= 1e-15 * x) {
      x = next;
      break;
    }
    x = next;
    if (cp.finite && x > cp.x_c) break;
  }
  double lo, hi;
  if (up) {
    hi = cp.finite ? cp.x_c : std::max(2.0 * x, x + 1.0);
    if (!cp.finite) {
      while (G(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e300) throw NumericalError("marked fixed point: no upper bracket");
      }
    }
    lo = std::min(x, hi);
    if (G(hi) > 0.0) {
      // theta at the critical value up to rounding: the root is the tangency point.
      fp.x = hi;
      return fp;
    }
  } else {
    lo = 0.0;
    hi = x;
  }
  if (G(lo) == 0.0) {
    fp.x = lo;
    return fp;
  }
  const double root = roots::bisect(G, lo, hi, 1e-15);
  auto dG = [&](double y) { return K * m.dM(y - 1.0) - 1.0; };
  fp.x = roots::polish(G, dG, root, lo, hi, 2);
  return fp;
}

// Gamma(theta) = nu (f(theta) - 1); +inf beyond theta_c.
inline double gamma_marked(double nu, const FixedPointModel& m, double theta, const CriticalPoint& cp) {
  const auto fp = marked_fixed_point(m, theta, cp);
  if (!fp.finite) return kInf;
  return nu * (fp.x - 1.0);
}

inline double gamma_marked(double nu, const NonnegLaw& h_law, double theta) {
  const FixedPointModel m(h_law);
  return gamma_marked(nu, m, theta, critical_point(m));
}

// Gamma'(theta) = nu f (d log K) / (1 - K M'(f - 1)) by implicit differentiation.
inline double gamma_marked_derivative(double nu, const FixedPointModel& m, double theta, const CriticalPoint& cp) {
  const auto fp = marked_fixed_point(m, theta, cp);
  if (!fp.finite) return kInf;
  const double denom = 1.0 - m.K(theta) * m.dM(fp.x - 1.0);
  if (!(denom > 0.0)) return kInf;
  return nu * fp.x * m.dlogK(theta) / denom;
}

struct GammaCurve {
  std::vector<double> theta_grid;
  std::vector<double> gamma_values;  // +inf beyond theta_c
  double theta_c = kInf;
  double x_c = kInf;
};

inline GammaCurve gamma_curve(double nu, const FixedPointModel& m, const std::vector<double>& thetas) {
  GammaCurve c;
  const auto cp = critical_point(m);
  c.theta_c = cp.theta_c;
  c.x_c = cp.x_c;
  c.theta_grid = thetas;
  c.gamma_values.reserve(thetas.size());
  for (double th : thetas) c.gamma_values.push_back(gamma_marked(nu, m, th, cp));
  return c;
}

// ---------------------------------------------------------------------------
// Rate functions.

// x log(x / (nu + x l1)) - x + x l1 + nu, with x log x = 0 at x = 0.
inline double rate_linear(double nu, double l1, double x) {
  if (!(nu > 0.0)) throw DomainError("rate_linear: nu must be > 0");
  if (!(l1 >= 0.0 && l1 < 1.0)) throw DomainError("rate_linear: needs 0 <= |h|_1 < 1");
  if (x < 0.0) return kInf;
  if (x == 0.0) return nu;
  return x * std::log(x / (nu + x * l1)) - x + x * l1 + nu;
}

// x^2 (1 - l1)^3 / (2 nu)
inline double rate_moderate(double nu, double l1, double x) {
  if (!(nu > 0.0)) throw DomainError("rate_moderate: nu must be > 0");
  if (!(l1 >= 0.0 && l1 < 1.0)) throw DomainError("rate_moderate: needs 0 <= |h|_1 < 1");
  const double d = 1.0 - l1;
  return x * x * (d * d * d) / (2.0 * nu);
}

struct MarkedRate {
  double value = 0.0;
  double theta_star = 0.0;
  double x_star = 1.0;
};

// Lambda(x) = theta* x - nu (x* - 1) where x* in (0, x_c) solves
// x* = (x / nu)(1 - r(x*)), r(y) = y M'(y - 1) / M(y - 1), and
// theta* = log x* - log M(x* - 1). Counting process only (K = e^theta).
inline MarkedRate rate_marked(double nu, const FixedPointModel& m, double x, const CriticalPoint& cp) {
  if (m.claim_law()) throw DomainError("rate_marked: counting-process rate only");
  if (!(nu > 0.0)) throw DomainError("rate_marked: nu must be > 0");
  MarkedRate r;
  if (x < 0.0) {
    r.value = kInf;
    return r;
  }
  if (x == 0.0) {
    r.value = nu;
    r.theta_star = -kInf;
    r.x_star = 0.0;
    return r;
  }
  auto ratio = [&](double y) { return y * m.dM(y - 1.0) / m.M(y - 1.0); };
  auto psi = [&](double y) { return y - (x / nu) * (1.0 - ratio(y)); };
  const double hi = cp.finite ? cp.x_c : [&] {
    double h = 2.0;
    while (psi(h) < 0.0) h *= 2.0;
    return h;
  }();
  const double xs = roots::bisect(psi, 0.0, hi, 1e-15);
  r.x_star = xs;
  r.theta_star = std::log(xs) - std::log(m.M(xs - 1.0));
  r.value = r.theta_star * x - nu * (xs - 1.0);
  return r;
}

inline MarkedRate rate_marked(double nu, const NonnegLaw& h_law, double x) {
  const FixedPointModel m(h_law);
  return rate_marked(nu, m, x, critical_point(m));
}

// sup_theta {theta x - Gamma(theta)} by golden-section search over
// [theta_lo, theta_c]; the objective is concave.
inline roots::Extremum legendre(double nu, const FixedPointModel& m, double x, const CriticalPoint& cp,
                                double theta_lo = -60.0) {
  const double hi = cp.finite ? cp.theta_c : 50.0;
  auto obj = [&](double th) {
    const double g = gamma_marked(nu, m, th, cp);
    return std::isfinite(g) ? th * x - g : -kInf;
  };
  return roots::golden_max(obj, theta_lo, hi, 1e-11);
}

// Closed forms for H(a) ~ Exponential(lambda).
inline double gamma_exp_marks_closed(double nu, double lambda, double theta) {
  const double disc = (lambda + 1.0) * (lambda + 1.0) - 4.0 * lambda * std::exp(theta);
  if (disc < 0.0) return kInf;
  return nu * (0.5 * (lambda + 1.0 - std::sqrt(disc)) - 1.0);
}

inline double theta_c_exp_marks_closed(double lambda) {
  return std::log((lambda + 1.0) * (lambda + 1.0) / (4.0 * lambda));
}

inline double rate_exp_marks_closed(double nu, double lambda, double x) {
  if (x < 0.0) return kInf;
  if (x == 0.0) return nu;
  const double root = std::sqrt(4.0 * x * x + nu * nu * (lambda + 1.0) * (lambda + 1.0));
  return x * std::log((-2.0 * x * x + x * root) / (lambda * nu * nu)) -
         nu * (0.5 * (lambda + 1.0 - (-2.0 * x + root) / nu) - 1.0);
}

// ---------------------------------------------------------------------------
// Small-time explosion asymptotics for lambda(z) = gamma z^k + delta.

struct SmallTimeExplosion {
  double exponent = 0.0;    // 1/(k-1): log P(tau <= eps) ~ -B eps^{-exponent}
  double c_k = 0.0;         // int_0^inf log(g y^k h0^k / (g y^k h0^k + 1)) dy  (< 0)
  double abs_c_k = 0.0;
  double rate_constant = 0.0;  // B = (k-1) (|C_k| / k)^{k/(k-1)}
};

inline SmallTimeExplosion explosion_small_time(double gamma, double k, double delta, double h0) {
  if (!(k > 1.0)) throw DomainError("explosion_small_time: needs k > 1");
  if (!(gamma > 0.0) || !(h0 > 0.0) || !(delta > 0.0)) {
    throw DomainError("explosion_small_time: needs gamma, delta, h(0) > 0");
  }
  auto f = [&](double y) {
    if (y <= 0.0) return 0.0;
    const double v = gamma * std::pow(y * h0, k);
    return -std::log1p(1.0 / v);
  };
  // The log singularity at 0 and the y^{-k} tail are split at y = 1/h0.
  const double split = 1.0 / h0;
  const double head = quad::integrate(f, 0.0, split, 1e-13, 1e-13, 20000).value;
  const double tail = quad::integrate_to_infinity(f, split, 1e-13, 1e-13).value;
  SmallTimeExplosion out;
  out.exponent = 1.0 / (k - 1.0);
  out.c_k = head + tail;
  out.abs_c_k = std::abs(out.c_k);
  out.rate_constant = (k - 1.0) * std::pow(out.abs_c_k / k, k / (k - 1.0));
  return out;
}

}  // namespace hawkes::ldp
