#pragma once

// Exciting functions h: [0, inf) -> [0, inf).
//
// Closed parametric families plus a tabulated escape hatch. Every family
// exposes its value, its tail integral H(t) = int_t^inf h, and a sampler for
// the normalised lag density h / |h|_1 used by the cluster sampler.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hawkes/error.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// h(t) = a e^{-b t}
struct ExponentialKernel {
  double a = 0.0;
  double b = 1.0;
};

struct ExpTerm {
  double a = 0.0;
  double b = 1.0;
};

// h(t) = sum_i a_i e^{-b_i t}
struct SumExpKernel {
  std::vector<ExpTerm> terms;
};

// h(t) = c (1 + t)^{-p}
struct PowerLawKernel {
  double c = 0.0;
  double p = 2.0;
};

// Piecewise-linear on the grid, optionally continued by h_n (t / t_n)^{-p}.
struct TabulatedKernel {
  std::vector<double> times;
  std::vector<double> values;
  std::optional<double> tail_exponent;
};

using KernelFamily = std::variant<ExponentialKernel, SumExpKernel, PowerLawKernel, TabulatedKernel>;

class Kernel {
 public:
  Kernel() : Kernel(ExponentialKernel{0.0, 1.0}) {}

  Kernel(KernelFamily family) : family_(std::move(family)) {
    validate();
    l1_ = tail(0.0);
    decreasing_ = compute_decreasing();
  }

  static Kernel exponential(double a, double b) { return Kernel(ExponentialKernel{a, b}); }
  static Kernel sum_exp(std::vector<ExpTerm> terms) { return Kernel(SumExpKernel{std::move(terms)}); }
  static Kernel power_law(double c, double p) { return Kernel(PowerLawKernel{c, p}); }
  static Kernel tabulated(std::vector<double> t, std::vector<double> h,
                          std::optional<double> tail_exponent = std::nullopt) {
    return Kernel(TabulatedKernel{std::move(t), std::move(h), tail_exponent});
  }

  const KernelFamily& family() const { return family_; }

  double l1_norm() const { return l1_; }
  bool is_decreasing() const { return decreasing_; }

  // Set for a tabulated kernel without a declared tail: it is treated as 0
  // beyond the grid by integrals and simulators.
  bool truncated() const {
    const auto* tab = std::get_if<TabulatedKernel>(&family_);
    return tab != nullptr && !tab->tail_exponent.has_value();
  }

  // Largest t at which h may be nonzero (+inf unless truncated).
  double support_end() const {
    if (truncated()) return std::get<TabulatedKernel>(family_).times.back();
    return kInf;
  }

  // True for exponential and sum-of-exponential families.
  bool is_markovian() const {
    return std::holds_alternative<ExponentialKernel>(family_) ||
           std::holds_alternative<SumExpKernel>(family_);
  }

  // (a_i, b_i) for the Markovian families.
  std::vector<ExpTerm> exp_terms() const {
    if (const auto* e = std::get_if<ExponentialKernel>(&family_)) return {{e->a, e->b}};
    if (const auto* s = std::get_if<SumExpKernel>(&family_)) return s->terms;
    throw DomainError("kernel is not a sum of exponentials");
  }

  // h(t); 0 for t < 0. Throws OutOfSupportError beyond an untailed grid.
  double operator()(double t) const {
    if (t < 0.0) return 0.0;
    if (const auto* tab = std::get_if<TabulatedKernel>(&family_)) {
      if (t > tab->times.back() && !tab->tail_exponent) {
        throw OutOfSupportError("tabulated kernel evaluated at t=" + std::to_string(t) +
                                " beyond its grid with no tail exponent");
      }
    }
    return value_unchecked(t);
  }

  // Like operator() but returns 0 beyond a truncated grid.
  double value_unchecked(double t) const {
    if (t < 0.0) return 0.0;
    return std::visit([t](const auto& k) { return eval(k, t); }, family_);
  }

  double at_zero() const { return value_unchecked(0.0); }

  // H(t) = int_t^inf h(s) ds, t >= 0.
  double tail(double t) const {
    t = std::max(t, 0.0);
    return std::visit([t](const auto& k) { return tail_of(k, t); }, family_);
  }

  // Draws a lag from the density h / |h|_1. Requires 0 < |h|_1 < inf.
  double sample_lag(Philox& rng) const {
    return std::visit([&rng, this](const auto& k) { return draw(k, rng, l1_); }, family_);
  }

 private:
  static double eval(const ExponentialKernel& k, double t) { return k.a * std::exp(-k.b * t); }
  static double eval(const SumExpKernel& k, double t) {
    double s = 0.0;
    for (const auto& term : k.terms) s += term.a * std::exp(-term.b * t);
    return s;
  }
  static double eval(const PowerLawKernel& k, double t) { return k.c * std::pow(1.0 + t, -k.p); }
  static double eval(const TabulatedKernel& k, double t) {
    const auto& ts = k.times;
    if (t >= ts.back()) {
      if (!k.tail_exponent) return t == ts.back() ? k.values.back() : 0.0;
      return k.values.back() * std::pow(t / ts.back(), -*k.tail_exponent);
    }
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
    return (1.0 - w) * k.values[j - 1] + w * k.values[j];
  }

  static double tail_of(const ExponentialKernel& k, double t) {
    return k.a == 0.0 ? 0.0 : k.a / k.b * std::exp(-k.b * t);
  }
  static double tail_of(const SumExpKernel& k, double t) {
    double s = 0.0;
    for (const auto& term : k.terms) s += term.a / term.b * std::exp(-term.b * t);
    return std::max(s, 0.0);
  }
  static double tail_of(const PowerLawKernel& k, double t) {
    if (k.c == 0.0) return 0.0;
    if (k.p <= 1.0) return kInf;
    return k.c / (k.p - 1.0) * std::pow(1.0 + t, 1.0 - k.p);
  }
  static double grid_tail(const TabulatedKernel& k) {
    if (!k.tail_exponent) return 0.0;
    const double p = *k.tail_exponent;
    if (k.values.back() == 0.0) return 0.0;
    if (p <= 1.0) return kInf;
    return k.values.back() * k.times.back() / (p - 1.0);
  }
  static double tail_of(const TabulatedKernel& k, double t) {
    const auto& ts = k.times;
    const auto& hs = k.values;
    if (t >= ts.back()) {
      if (!k.tail_exponent) return 0.0;
      const double p = *k.tail_exponent;
      if (hs.back() == 0.0) return 0.0;
      if (p <= 1.0) return kInf;
      return hs.back() * ts.back() / (p - 1.0) * std::pow(t / ts.back(), 1.0 - p);
    }
    // Exact trapezoid on the piecewise-linear part.
    double s = 0.0;
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t j = static_cast<std::size_t>(it - ts.begin());
    const double ht = eval(k, t);
    s += 0.5 * (ht + hs[j]) * (ts[j] - t);
    for (; j + 1 < ts.size(); ++j) s += 0.5 * (hs[j] + hs[j + 1]) * (ts[j + 1] - ts[j]);
    return s + grid_tail(k);
  }

  static double draw(const ExponentialKernel& k, Philox& rng, double) { return rng.exponential(k.b); }
  static double draw(const SumExpKernel& k, Philox& rng, double l1) {
    if (std::any_of(k.terms.begin(), k.terms.end(), [](const ExpTerm& t) { return t.a < 0.0; })) {
      // Not a mixture: invert H(t) = (1 - U) |h|_1 by bisection.
      const double target = rng.uniform() * l1;
      double lo = 0.0, hi = 1.0;
      while (tail_of(k, hi) > target) hi *= 2.0;
      for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (tail_of(k, mid) > target ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    double u = rng.uniform() * l1;
    for (const auto& term : k.terms) {
      u -= term.a / term.b;
      if (u <= 0.0) return rng.exponential(term.b);
    }
    return rng.exponential(k.terms.back().b);
  }
  static double draw(const PowerLawKernel& k, Philox& rng, double) {
    // 1 - (1 + t)^{1-p} = U
    return std::pow(rng.uniform(), -1.0 / (k.p - 1.0)) - 1.0;
  }
  static double draw(const TabulatedKernel& k, Philox& rng, double l1) {
    const auto& ts = k.times;
    const auto& hs = k.values;
    double u = rng.uniform() * l1;
    for (std::size_t j = 0; j + 1 < ts.size(); ++j) {
      const double dt = ts[j + 1] - ts[j];
      const double mass = 0.5 * (hs[j] + hs[j + 1]) * dt;
      if (u <= mass && mass > 0.0) {
        // Solve h_j x + (h_{j+1} - h_j) x^2 / (2 dt) = u for x in [0, dt].
        const double slope = (hs[j + 1] - hs[j]) / dt;
        double x;
        if (std::abs(slope) < 1e-300) {
          x = u / hs[j];
        } else {
          const double disc = std::max(hs[j] * hs[j] + 2.0 * slope * u, 0.0);
          x = 2.0 * u / (hs[j] + std::sqrt(disc));
        }
        return ts[j] + std::clamp(x, 0.0, dt);
      }
      u -= mass;
    }
    if (!k.tail_exponent) return ts.back();
    // Tail mass beyond t_n: h_n t_n/(p-1) (1 - (t/t_n)^{1-p}).
    const double p = *k.tail_exponent;
    const double total = hs.back() * ts.back() / (p - 1.0);
    const double frac = std::clamp(u / total, 0.0, 1.0 - 1e-16);
    return ts.back() * std::pow(1.0 - frac, 1.0 / (1.0 - p));
  }

  void validate() const {
    std::visit([](const auto& k) { check(k); }, family_);
  }
  static void check(const ExponentialKernel& k) {
    if (!(k.a >= 0.0) || !(k.b > 0.0) || !std::isfinite(k.a) || !std::isfinite(k.b)) {
      throw DomainError("exponential kernel needs a >= 0 and b > 0");
    }
  }
  static void check(const SumExpKernel& k) {
    for (const auto& term : k.terms) {
      if (!(term.b > 0.0) || !std::isfinite(term.a) || !std::isfinite(term.b)) {
        throw DomainError("sum-of-exponentials kernel needs finite a_i and b_i > 0");
      }
    }
    // Nonnegativity: h(0) >= 0, slowest-decaying term nonnegative, dense check.
    if (k.terms.empty()) return;
    double slowest_b = kInf, slowest_a = 0.0;
    for (const auto& term : k.terms) {
      if (term.b < slowest_b) {
        slowest_b = term.b;
        slowest_a = term.a;
      }
    }
    if (slowest_a < 0.0) throw DomainError("sum-of-exponentials kernel negative at large t");
    for (int i = 0; i <= 2000; ++i) {
      const double t = i * (40.0 / slowest_b) / 2000.0;
      if (eval(k, t) < -1e-14) throw DomainError("sum-of-exponentials kernel takes negative values");
    }
  }
  static void check(const PowerLawKernel& k) {
    if (!(k.c >= 0.0) || !(k.p > 0.0) || !std::isfinite(k.c) || !std::isfinite(k.p)) {
      throw DomainError("power-law kernel needs c >= 0 and p > 0");
    }
  }
  static void check(const TabulatedKernel& k) {
    if (k.times.size() < 2 || k.times.size() != k.values.size()) {
      throw DomainError("tabulated kernel needs >= 2 (t, h) pairs of equal length");
    }
    if (k.times.front() != 0.0) throw DomainError("tabulated kernel grid must start at t = 0");
    for (std::size_t i = 0; i < k.times.size(); ++i) {
      if (!(k.values[i] >= 0.0) || !std::isfinite(k.values[i])) {
        throw DomainError("tabulated kernel values must be finite and nonnegative");
      }
      if (i > 0 && !(k.times[i] > k.times[i - 1])) {
        throw DomainError("tabulated kernel grid times must be strictly increasing");
      }
    }
    if (k.tail_exponent && !(*k.tail_exponent > 0.0)) {
      throw DomainError("tabulated kernel tail exponent must be positive");
    }
  }

  bool compute_decreasing() const {
    if (const auto* s = std::get_if<SumExpKernel>(&family_)) {
      bool all_pos = std::all_of(s->terms.begin(), s->terms.end(),
                                 [](const ExpTerm& t) { return t.a >= 0.0; });
      if (all_pos) return true;
      double slowest = kInf;
      for (const auto& t : s->terms) slowest = std::min(slowest, t.b);
      double prev = eval(*s, 0.0);
      for (int i = 1; i <= 4000; ++i) {
        const double v = eval(*s, i * (40.0 / slowest) / 4000.0);
        if (v > prev + 1e-15) return false;
        prev = v;
      }
      return true;
    }
    if (const auto* tab = std::get_if<TabulatedKernel>(&family_)) {
      for (std::size_t i = 1; i < tab->values.size(); ++i) {
        if (tab->values[i] > tab->values[i - 1]) return false;
      }
      return true;
    }
    return true;
  }

  KernelFamily family_;
  double l1_ = 0.0;
  bool decreasing_ = true;
};

// Operation form of Kernel::operator().
inline double kernel_eval(const Kernel& k, double t) {
  if (!std::isfinite(t)) throw DomainError("kernel_eval: t must be finite");
  return k(t);
}

}  // namespace hawkes
