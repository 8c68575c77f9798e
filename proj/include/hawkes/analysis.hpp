#pragma once

// Deterministic functionals of kernels and rates: norms, tails, moments,
// Laplace/Fourier transforms, the Malthusian parameter, second-order
// spectra and regime classification.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

#include "hawkes/error.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/rate.hpp"
#include "hawkes/roots.hpp"

namespace hawkes::analysis {

inline double l1_norm(const Kernel& k) { return k.l1_norm(); }

// H(t) = int_t^inf h(s) ds.
inline double tail_integral(const Kernel& k, double t) {
  if (!(t >= 0.0)) throw DomainError("tail_integral: t must be >= 0");
  return k.tail(t);
}

// Point beyond which h < rel * h(0), for finite-range quadrature.
inline double truncation_point(const Kernel& k, double rel = 1e-14) {
  if (k.truncated()) return k.support_end();
  const double peak = k.at_zero();
  if (peak <= 0.0) return 1.0;
  if (const auto* p = std::get_if<PowerLawKernel>(&k.family())) {
    return std::pow(1.0 / rel, 1.0 / p->p) - 1.0;
  }
  if (const auto* tab = std::get_if<TabulatedKernel>(&k.family())) {
    return tab->times.back() * std::pow(1.0 / rel, 1.0 / *tab->tail_exponent);
  }
  double slowest = kInf;
  for (const auto& term : k.exp_terms()) slowest = std::min(slowest, term.b);
  return std::log(1.0 / rel) / slowest + 1.0;
}

// m = int_0^inf t h(t) dt.
inline double first_moment(const Kernel& k) {
  return std::visit(
      [&k](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) {
          return f.a / (f.b * f.b);
        } else if constexpr (std::is_same_v<T, SumExpKernel>) {
          double s = 0.0;
          for (const auto& t : f.terms) s += t.a / (t.b * t.b);
          return s;
        } else if constexpr (std::is_same_v<T, PowerLawKernel>) {
          if (f.c == 0.0) return 0.0;
          if (f.p <= 2.0) return kInf;
          return f.c / ((f.p - 1.0) * (f.p - 2.0));
        } else {
          // Piecewise-linear segments integrated exactly, plus the tail.
          double s = 0.0;
          const auto& ts = f.times;
          const auto& hs = f.values;
          for (std::size_t j = 0; j + 1 < ts.size(); ++j) {
            const double t0 = ts[j], t1 = ts[j + 1], h0 = hs[j], h1 = hs[j + 1];
            const double dt = t1 - t0;
            // int_0^dt (t0 + x)(h0 + (h1 - h0) x / dt) dx
            s += t0 * h0 * dt + (t0 * (h1 - h0) + h0 * dt) * dt / 2.0 + (h1 - h0) * dt * dt / 3.0;
          }
          if (f.tail_exponent && hs.back() > 0.0) {
            const double p = *f.tail_exponent;
            if (p <= 2.0) return kInf;
            s += hs.back() * ts.back() * ts.back() / (p - 2.0);
          }
          (void)k;
          return s;
        }
      },
      k.family());
}

// Laplace transform int_0^inf e^{-theta t} h(t) dt for theta >= 0 (and, for
// exponential families, theta > -min b).
inline double laplace(const Kernel& k, double theta) {
  if (k.is_markovian()) {
    double s = 0.0;
    for (const auto& t : k.exp_terms()) {
      if (!(t.b + theta > 0.0)) return kInf;
      s += t.a / (t.b + theta);
    }
    return s;
  }
  if (theta == 0.0) return k.l1_norm();
  if (theta < 0.0) throw DomainError("laplace: theta must be >= 0 for this kernel family");
  auto f = [&](double t) { return std::exp(-theta * t) * k.value_unchecked(t); };
  if (k.truncated()) return quad::integrate(f, 0.0, k.support_end(), 1e-13, 1e-13).value;
  return quad::integrate_to_infinity(f, 0.0, 1e-13, 1e-13).value;
}

// -d/dtheta of the Laplace transform: int t e^{-theta t} h(t) dt.
inline double laplace_moment(const Kernel& k, double theta) {
  if (k.is_markovian()) {
    double s = 0.0;
    for (const auto& t : k.exp_terms()) s += t.a / ((t.b + theta) * (t.b + theta));
    return s;
  }
  auto f = [&](double t) { return t * std::exp(-theta * t) * k.value_unchecked(t); };
  if (k.truncated()) return quad::integrate(f, 0.0, k.support_end(), 1e-13, 1e-13).value;
  return quad::integrate_to_infinity(f, 0.0, 1e-13, 1e-13).value;
}

// Fourier transform int_0^inf e^{i omega t} h(t) dt.
//
// Exponential families use a / (b - i omega). Other families integrate
// numerically up to min(truncation point, 1e4 / |omega|) and add the
// leading integration-by-parts term of the remaining tail.
inline std::complex<double> fourier(const Kernel& k, double omega) {
  using cd = std::complex<double>;
  if (k.is_markovian()) {
    cd s = 0.0;
    for (const auto& t : k.exp_terms()) s += t.a / cd(t.b, -omega);
    return s;
  }
  if (omega == 0.0) return k.l1_norm();
  const double w = std::abs(omega);
  const double trunc = truncation_point(k);
  const double end = std::min(trunc, 1e4 / w);
  const double period = 2.0 * std::numbers::pi / w;
  double re = 0.0, im = 0.0;
  double a = 0.0;
  while (a < end) {
    // Geometrically growing panels: dense where h varies fastest.
    const double b = std::min(end, a + std::max(period, 0.25 * a));
    re += quad::integrate([&](double t) { return std::cos(omega * t) * k.value_unchecked(t); }, a, b,
                          1e-13, 1e-12).value;
    im += quad::integrate([&](double t) { return std::sin(omega * t) * k.value_unchecked(t); }, a, b,
                          1e-13, 1e-12).value;
    a = b;
  }
  if (end < trunc) {
    // int_L^inf e^{i w t} h(t) dt ~ -e^{i w L} h(L) / (i w)
    const cd tail = -std::exp(cd(0.0, omega * end)) * k.value_unchecked(end) / cd(0.0, omega);
    re += tail.real();
    im += tail.imag();
  }
  return {re, im};
}

// Unique theta > 0 with laplace(k, theta) = 1; requires |h|_1 > 1.
inline double malthusian(const Kernel& k) {
  const double l1 = k.l1_norm();
  if (!(l1 > 1.0)) {
    throw RegimeError("malthusian: needs |h|_1 > 1 (super-critical), got " + std::to_string(l1));
  }
  if (const auto* e = std::get_if<ExponentialKernel>(&k.family())) return e->a - e->b;
  auto f = [&](double th) { return laplace(k, th) - 1.0; };
  double hi = 1.0;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericalError("malthusian: no upper bracket");
  }
  double lo = 0.0;
  // Shrink lo away from 0 when the transform diverges there.
  const double root = roots::bisect(f, lo, hi, 1e-13);
  auto df = [&](double th) { return -laplace_moment(k, th); };
  return roots::polish(f, df, root, lo, hi, 2);
}

// Bartlett spectral density nu / (2 pi (1 - |h|_1) |1 - h^(omega)|^2) of a
// stationary linear Hawkes process.
inline double bartlett_density(const Kernel& k, double nu, double omega) {
  const double l1 = k.l1_norm();
  if (!(l1 < 1.0)) throw RegimeError("bartlett_density: needs |h|_1 < 1, got " + std::to_string(l1));
  if (std::isinf(omega)) return nu / (2.0 * std::numbers::pi * (1.0 - l1));
  const std::complex<double> hw = fourier(k, omega);
  return nu / (2.0 * std::numbers::pi * (1.0 - l1) * std::norm(1.0 - hw));
}

// Covariance density of the stationary exponential-kernel process,
// h(t) = a e^{-b t}: nu a b (2b - a) / (2 (b - a)^2) e^{-(b - a) tau}.
inline double exp_covariance_density(double a, double b, double nu, double tau) {
  if (!(b > a)) throw RegimeError("exp_covariance_density: needs b > a for stationarity");
  return nu * a * b * (2.0 * b - a) / (2.0 * (b - a) * (b - a)) * std::exp(-(b - a) * std::abs(tau));
}

enum class Regime { Sublinear, SubCritical, Critical, SuperCritical, Explosive };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Sublinear: return "Sublinear";
    case Regime::SubCritical: return "SubCritical";
    case Regime::Critical: return "Critical";
    case Regime::SuperCritical: return "SuperCritical";
    case Regime::Explosive: return "Explosive";
  }
  return "?";
}

struct RegimeReport {
  Regime regime = Regime::SubCritical;
  double slope = 0.0;  // lim lambda(z)/z
  double l1 = 0.0;
  bool explosive_sum_converges = false;
  std::optional<double> stability_margin;  // slope * |h|_1 when finite
};

inline RegimeReport classify(const RateFn& r, const Kernel& k, double critical_tol = 1e-12) {
  RegimeReport rep;
  rep.slope = r.asymptotic_slope();
  rep.l1 = k.l1_norm();
  rep.explosive_sum_converges = r.explosive_series_converges();
  if (std::isfinite(rep.slope)) rep.stability_margin = rep.slope * rep.l1;

  // Explosion needs the process to actually self-excite.
  if (rep.explosive_sum_converges && rep.l1 > 0.0) {
    rep.regime = Regime::Explosive;
    return rep;
  }
  if (rep.slope == 0.0 || rep.l1 == 0.0) {
    rep.regime = rep.slope == 0.0 ? Regime::Sublinear : Regime::SubCritical;
    return rep;
  }
  const double margin = rep.slope * rep.l1;
  if (std::abs(margin - 1.0) <= critical_tol) rep.regime = Regime::Critical;
  else if (margin < 1.0) rep.regime = Regime::SubCritical;
  else rep.regime = Regime::SuperCritical;
  return rep;
}

}  // namespace hawkes::analysis
