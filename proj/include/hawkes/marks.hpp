#pragma once

// Nonnegative one-dimensional laws (for H(a) and claim sizes C) and the mark
// model of a marked Hawkes process with h(t, a) = a g(t).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hawkes/error.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

struct PointMass {
  double value = 0.0;
};

// Exponential with the given rate (mean 1/rate).
struct ExponentialLaw {
  double rate = 1.0;
};

// Density proportional to e^{tilt x} on [lo, hi]; tilt = 0 is the uniform law.
struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
  double tilt = 0.0;
};

struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;
};

using LawFamily = std::variant<PointMass, ExponentialLaw, UniformLaw, DiscreteLaw>;

class NonnegLaw {
 public:
  NonnegLaw() : NonnegLaw(PointMass{0.0}) {}
  NonnegLaw(LawFamily family) : family_(std::move(family)) { validate(); }

  static NonnegLaw point(double v) { return NonnegLaw(PointMass{v}); }
  static NonnegLaw exponential(double rate) { return NonnegLaw(ExponentialLaw{rate}); }
  static NonnegLaw uniform(double lo, double hi) { return NonnegLaw(UniformLaw{lo, hi, 0.0}); }
  static NonnegLaw discrete(std::vector<double> v, std::vector<double> p) {
    return NonnegLaw(DiscreteLaw{std::move(v), std::move(p)});
  }

  const LawFamily& family() const { return family_; }

  double mean() const { return moment_gen(0.0, 1); }

  double variance() const {
    const double m = mean();
    return moment_gen(0.0, 2) - m * m;
  }

  // Supremum of the s for which E[e^{sX}] is finite.
  double mgf_abscissa() const {
    if (const auto* e = std::get_if<ExponentialLaw>(&family_)) return e->rate;
    return kInf;
  }

  // E[e^{sX}] (+inf beyond the abscissa).
  double mgf(double s) const { return moment_gen(s, 0); }

  // E[X e^{sX}].
  double mgf_prime(double s) const { return moment_gen(s, 1); }

  // E[X^2 e^{sX}].
  double mgf_second(double s) const { return moment_gen(s, 2); }

  // The law with density proportional to e^{s x} relative to this one.
  NonnegLaw tilted(double s) const {
    if (!(s < mgf_abscissa())) throw DomainError("tilt beyond the moment generating function domain");
    return std::visit(
        [s](const auto& l) -> NonnegLaw {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, PointMass>) return NonnegLaw(l);
          else if constexpr (std::is_same_v<T, ExponentialLaw>) return NonnegLaw(ExponentialLaw{l.rate - s});
          else if constexpr (std::is_same_v<T, UniformLaw>) return NonnegLaw(UniformLaw{l.lo, l.hi, l.tilt + s});
          else {
            std::vector<double> w(l.values.size());
            double total = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) total += (w[i] = l.probs[i] * std::exp(s * l.values[i]));
            for (auto& x : w) x /= total;
            return NonnegLaw(DiscreteLaw{l.values, w});
          }
        },
        family_);
  }

  // The law of c X for c > 0.
  NonnegLaw scaled(double c) const {
    if (!(c > 0.0)) throw DomainError("law scale must be positive");
    return std::visit(
        [c](const auto& l) -> NonnegLaw {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, PointMass>) return NonnegLaw(PointMass{l.value * c});
          else if constexpr (std::is_same_v<T, ExponentialLaw>) return NonnegLaw(ExponentialLaw{l.rate / c});
          else if constexpr (std::is_same_v<T, UniformLaw>) return NonnegLaw(UniformLaw{l.lo * c, l.hi * c, l.tilt / c});
          else {
            std::vector<double> v = l.values;
            for (auto& x : v) x *= c;
            return NonnegLaw(DiscreteLaw{v, l.probs});
          }
        },
        family_);
  }

  double sample(Philox& rng) const {
    return std::visit(
        [&rng](const auto& l) -> double {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, PointMass>) return l.value;
          else if constexpr (std::is_same_v<T, ExponentialLaw>) return rng.exponential(l.rate);
          else if constexpr (std::is_same_v<T, UniformLaw>) {
            const double u = rng.uniform();
            const double w = l.hi - l.lo;
            if (std::abs(l.tilt * w) < 1e-12) return l.lo + u * w;
            // Inverse CDF of the truncated exponential family.
            const double x = std::log1p(u * std::expm1(l.tilt * w)) / l.tilt;
            return l.lo + std::clamp(x, 0.0, w);
          } else {
            double u = rng.uniform();
            for (std::size_t i = 0; i < l.values.size(); ++i) {
              u -= l.probs[i];
              if (u <= 0.0) return l.values[i];
            }
            return l.values.back();
          }
        },
        family_);
  }

 private:
  // E[X^n e^{sX}] for n in {0, 1, 2}.
  double moment_gen(double s, int n) const {
    return std::visit(
        [s, n](const auto& l) -> double {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, PointMass>) {
            return std::pow(l.value, n) * std::exp(s * l.value);
          } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
            if (!(s < l.rate)) return kInf;
            const double r = l.rate / (l.rate - s);
            const double inv = 1.0 / (l.rate - s);
            if (n == 0) return r;
            if (n == 1) return r * inv;
            return 2.0 * r * inv * inv;
          } else if constexpr (std::is_same_v<T, UniformLaw>) {
            const auto& gl = quad::GaussLegendre64::instance();
            const double w = l.hi - l.lo;
            if (w == 0.0) return std::pow(l.lo, n) * std::exp(s * l.lo);
            // Normalising constant of e^{tilt x} on [lo, hi], relative to e^{tilt lo}.
            auto dens = [&](double x) { return std::exp(l.tilt * (x - l.lo)); };
            const double z = gl.integrate(dens, l.lo, l.hi);
            auto f = [&](double x) { return std::pow(x, n) * std::exp(s * x) * dens(x); };
            return gl.integrate(f, l.lo, l.hi) / z;
          } else {
            double acc = 0.0;
            for (std::size_t i = 0; i < l.values.size(); ++i) {
              acc += l.probs[i] * std::pow(l.values[i], n) * std::exp(s * l.values[i]);
            }
            return acc;
          }
        },
        family_);
  }

  void validate() const {
    std::visit(
        [](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, PointMass>) {
            if (!(l.value >= 0.0) || !std::isfinite(l.value)) throw DomainError("point mass must be >= 0");
          } else if constexpr (std::is_same_v<T, ExponentialLaw>) {
            if (!(l.rate > 0.0) || !std::isfinite(l.rate)) throw DomainError("exponential law needs rate > 0");
          } else if constexpr (std::is_same_v<T, UniformLaw>) {
            if (!(l.lo >= 0.0) || !(l.hi >= l.lo) || !std::isfinite(l.hi) || !std::isfinite(l.tilt)) {
              throw DomainError("uniform law needs 0 <= lo <= hi");
            }
          } else {
            if (l.values.empty() || l.values.size() != l.probs.size()) {
              throw DomainError("discrete law needs matching nonempty values/probs");
            }
            double total = 0.0;
            for (std::size_t i = 0; i < l.values.size(); ++i) {
              if (!(l.values[i] >= 0.0) || !(l.probs[i] >= 0.0)) {
                throw DomainError("discrete law needs nonnegative values and probabilities");
              }
              total += l.probs[i];
            }
            if (std::abs(total - 1.0) > 1e-9) throw DomainError("discrete law probabilities must sum to 1");
          }
        },
        family_);
  }

  LawFamily family_;
};

// h(t, a) = a0 g(t)
struct DeterministicMark {
  double a0 = 1.0;
};

// Scale chosen so that H(a) = a |g|_1 is Exponential(rate).
struct ExponentialHMark {
  double rate = 1.0;
};

// h(t, a) = a g(t) with a drawn from `scale_law`.
struct ScaledBaseMark {
  NonnegLaw scale_law;
};

using MarkLaw = std::variant<DeterministicMark, ExponentialHMark, ScaledBaseMark>;

struct MarkModel {
  MarkLaw mark_law = DeterministicMark{1.0};
  std::optional<NonnegLaw> claim_law;

  // The law of the mark scale a relative to a base kernel with norm g1.
  NonnegLaw scale_law(double g1) const {
    return std::visit(
        [g1](const auto& m) -> NonnegLaw {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, DeterministicMark>) return NonnegLaw::point(m.a0);
          else if constexpr (std::is_same_v<T, ExponentialHMark>) {
            if (!(g1 > 0.0 && std::isfinite(g1))) throw DomainError("ExponentialH marks need 0 < |g|_1 < inf");
            return NonnegLaw::exponential(m.rate * g1);
          } else {
            return m.scale_law;
          }
        },
        mark_law);
  }

  // The law of H(a) = int_0^inf h(t, a) dt = a |g|_1.
  NonnegLaw h_law(double g1) const {
    if (const auto* e = std::get_if<ExponentialHMark>(&mark_law)) return NonnegLaw::exponential(e->rate);
    const NonnegLaw a = scale_law(g1);
    if (g1 == 0.0) return NonnegLaw::point(0.0);
    return a.scaled(g1);
  }
};

}  // namespace hawkes
