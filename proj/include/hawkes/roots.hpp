#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "hawkes/error.hpp"

namespace hawkes::roots {

// Bisection on [lo, hi] where f(lo) and f(hi) have opposite signs (a zero at
// either end is accepted). Stops when the bracket is narrower than `x_tol`
// in absolute terms or the midpoint no longer moves.
template <typename F>
double bisect(const F& f, double lo, double hi, double x_tol = 1e-12, int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericalError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Newton steps from x that are kept only while they shrink |f| and stay
// inside [lo, hi].
template <typename F, typename DF>
double polish(const F& f, const DF& df, double x, double lo, double hi, int steps = 2) {
  double fx = f(x);
  for (int i = 0; i < steps; ++i) {
    const double d = df(x);
    if (!(std::isfinite(d)) || d == 0.0) break;
    const double next = x - fx / d;
    if (!(next >= lo && next <= hi)) break;
    const double fn = f(next);
    if (!(std::abs(fn) <= std::abs(fx))) break;
    x = next;
    fx = fn;
  }
  return x;
}

struct Extremum {
  double x;
  double value;
};

// Golden-section search for the maximum of a unimodal f on [lo, hi].
template <typename F>
Extremum golden_max(const F& f, double lo, double hi, double x_tol = 1e-11, int max_iter = 300) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && b - a > x_tol; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  Extremum best{c, fc};
  if (fd > best.value) best = {d, fd};
  const double fa = f(lo), fb = f(hi);
  if (fa > best.value) best = {lo, fa};
  if (fb > best.value) best = {hi, fb};
  return best;
}

template <typename F>
Extremum golden_min(const F& f, double lo, double hi, double x_tol = 1e-11) {
  auto neg = [&](double x) { return -f(x); };
  Extremum e = golden_max(neg, lo, hi, x_tol);
  return {e.x, -e.value};
}

}  // namespace hawkes::roots
