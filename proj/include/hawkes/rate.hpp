#pragma once

// Rate functions lambda(z): [0, inf) -> [0, inf), continuous and
// nondecreasing.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "hawkes/error.hpp"

namespace hawkes {

// nu + z
struct LinearRate {
  double nu = 1.0;
};

// nu + alpha z
struct ScaledLinearRate {
  double alpha = 1.0;
  double nu = 1.0;
};

// gamma z^k + delta
struct PowerRate {
  double gamma = 1.0;
  double k = 1.0;
  double delta = 1.0;
};

// gamma (c + z)^beta with 0 < beta < 1
struct SubPowerRate {
  double gamma = 1.0;
  double beta = 0.5;
  double c = 1.0;
};

// gamma (c + z)^k for any k > 0; covers the explosive (1 + z)^k examples.
struct ShiftedPowerRate {
  double gamma = 1.0;
  double c = 1.0;
  double k = 2.0;
};

// log(c + z) with c > 1
struct LogRate {
  double c = 2.0;
};

using RateFamily = std::variant<LinearRate, ScaledLinearRate, PowerRate, SubPowerRate,
                                ShiftedPowerRate, LogRate>;

class RateFn {
 public:
  RateFn() : RateFn(LinearRate{1.0}) {}

  RateFn(RateFamily family) : family_(family) { validate(); }

  static RateFn linear(double nu) { return RateFn(LinearRate{nu}); }
  static RateFn scaled_linear(double alpha, double nu) { return RateFn(ScaledLinearRate{alpha, nu}); }
  static RateFn power(double gamma, double k, double delta) { return RateFn(PowerRate{gamma, k, delta}); }
  static RateFn sub_power(double gamma, double beta, double c) { return RateFn(SubPowerRate{gamma, beta, c}); }
  static RateFn shifted_power(double gamma, double c, double k) {
    return RateFn(ShiftedPowerRate{gamma, c, k});
  }
  static RateFn log_rate(double c) { return RateFn(LogRate{c}); }

  const RateFamily& family() const { return family_; }

  double operator()(double z) const {
    if (!(z >= 0.0)) throw DomainError("rate_eval: z must be >= 0, got " + std::to_string(z));
    return value_unchecked(z);
  }

  double value_unchecked(double z) const {
    return std::visit(
        [z](const auto& r) -> double {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, LinearRate>) return r.nu + z;
          else if constexpr (std::is_same_v<T, ScaledLinearRate>) return r.nu + r.alpha * z;
          else if constexpr (std::is_same_v<T, PowerRate>) return r.gamma * std::pow(z, r.k) + r.delta;
          else if constexpr (std::is_same_v<T, SubPowerRate>) return r.gamma * std::pow(r.c + z, r.beta);
          else if constexpr (std::is_same_v<T, ShiftedPowerRate>) return r.gamma * std::pow(r.c + z, r.k);
          else return std::log(r.c + z);
        },
        family_);
  }

  // lim_{z->inf} lambda(z)/z; +inf for superlinear growth.
  double asymptotic_slope() const {
    return std::visit(
        [](const auto& r) -> double {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, LinearRate>) return 1.0;
          else if constexpr (std::is_same_v<T, ScaledLinearRate>) return r.alpha;
          else if constexpr (std::is_same_v<T, PowerRate> || std::is_same_v<T, ShiftedPowerRate>) {
            if (r.k < 1.0) return 0.0;
            if (r.k == 1.0) return r.gamma;
            return std::numeric_limits<double>::infinity();
          } else {
            return 0.0;
          }
        },
        family_);
  }

  // Global Lipschitz constant on [0, inf) when one exists.
  std::optional<double> lipschitz_constant() const {
    return std::visit(
        [](const auto& r) -> std::optional<double> {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, LinearRate>) return 1.0;
          else if constexpr (std::is_same_v<T, ScaledLinearRate>) return r.alpha;
          else if constexpr (std::is_same_v<T, PowerRate>) {
            if (r.k == 1.0) return r.gamma;
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, SubPowerRate>) {
            return r.gamma * r.beta * std::pow(r.c, r.beta - 1.0);
          } else if constexpr (std::is_same_v<T, ShiftedPowerRate>) {
            if (r.k <= 1.0) return r.gamma * r.k * std::pow(r.c, r.k - 1.0);
            return std::nullopt;
          } else {
            return 1.0 / r.c;
          }
        },
        family_);
  }

  // Whether sum_{n>=0} 1/lambda(n) converges, decided per family.
  bool explosive_series_converges() const {
    return std::visit(
        [](const auto& r) -> bool {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, PowerRate> || std::is_same_v<T, ShiftedPowerRate>) {
            return r.k > 1.0;
          } else {
            return false;
          }
        },
        family_);
  }

  // Upper bound on int_z^inf dy / lambda(y); exact for ShiftedPower.
  // +inf when the integral diverges.
  double reciprocal_tail(double z) const {
    return std::visit(
        [z](const auto& r) -> double {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, ShiftedPowerRate>) {
            if (r.k <= 1.0) return std::numeric_limits<double>::infinity();
            return std::pow(r.c + z, 1.0 - r.k) / (r.gamma * (r.k - 1.0));
          } else if constexpr (std::is_same_v<T, PowerRate>) {
            if (r.k <= 1.0 || z <= 0.0) return std::numeric_limits<double>::infinity();
            return std::pow(z, 1.0 - r.k) / (r.gamma * (r.k - 1.0));
          } else {
            return std::numeric_limits<double>::infinity();
          }
        },
        family_);
  }

  // (alpha, nu) when lambda(z) = nu + alpha z.
  std::optional<std::pair<double, double>> linear_coefficients() const {
    if (const auto* l = std::get_if<LinearRate>(&family_)) return std::pair{1.0, l->nu};
    if (const auto* s = std::get_if<ScaledLinearRate>(&family_)) return std::pair{s->alpha, s->nu};
    return std::nullopt;
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          auto fin = [](double x) { return std::isfinite(x); };
          if constexpr (std::is_same_v<T, LinearRate>) {
            if (!(r.nu >= 0.0) || !fin(r.nu)) throw DomainError("linear rate needs nu >= 0");
          } else if constexpr (std::is_same_v<T, ScaledLinearRate>) {
            if (!(r.nu >= 0.0) || !(r.alpha >= 0.0) || !fin(r.nu) || !fin(r.alpha)) {
              throw DomainError("scaled linear rate needs nu >= 0 and alpha >= 0");
            }
          } else if constexpr (std::is_same_v<T, PowerRate>) {
            if (!(r.gamma > 0.0) || !(r.k > 0.0) || !(r.delta > 0.0)) {
              throw DomainError("power rate needs gamma, k, delta > 0");
            }
          } else if constexpr (std::is_same_v<T, SubPowerRate>) {
            if (!(r.gamma > 0.0) || !(r.beta > 0.0 && r.beta < 1.0) || !(r.c > 0.0)) {
              throw DomainError("sub-power rate needs gamma > 0, 0 < beta < 1, c > 0");
            }
          } else if constexpr (std::is_same_v<T, ShiftedPowerRate>) {
            if (!(r.gamma > 0.0) || !(r.k > 0.0) || !(r.c > 0.0)) {
              throw DomainError("shifted power rate needs gamma, c, k > 0");
            }
          } else {
            if (!(r.c > 1.0)) throw DomainError("log rate needs c > 1");
          }
        },
        family_);
  }

  RateFamily family_;
};

inline double rate_eval(const RateFn& r, double z) { return r(z); }

}  // namespace hawkes
