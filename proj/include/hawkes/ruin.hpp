#pragma once

// Ruin exponents for the risk process R_t = u + rho t - sum of claims,
// with claims arriving at the events of a marked linear Hawkes process.

#include <cmath>
#include <variant>

#include "hawkes/ldp.hpp"

namespace hawkes::ldp {

class RiskSpec {
 public:
  RiskSpec(double rho, double nu, NonnegLaw h_law, NonnegLaw claim_law, double u = 0.0, double z = kInf)
      : rho_(rho), nu_(nu), model_(std::move(h_law), std::move(claim_law)), u_(u), z_(z) {
    if (!(nu > 0.0)) throw DomainError("risk: nu must be > 0");
    if (!(rho > 0.0)) throw DomainError("risk: premium rate must be > 0");
    if (!(u >= 0.0)) throw DomainError("risk: initial reserve must be >= 0");
    if (!(z > 0.0)) throw DomainError("risk: horizon factor must be > 0");
    if (!(rho > net_profit_threshold())) throw DomainError("risk: net-profit condition violated");
  }

  double rho() const { return rho_; }
  double nu() const { return nu_; }
  double u() const { return u_; }
  double z() const { return z_; }
  const FixedPointModel& model() const { return model_; }
  const NonnegLaw& h_law() const { return model_.h_law(); }
  const NonnegLaw& claim_law() const { return *model_.claim_law(); }

  // E[C] nu / (1 - E[H])
  double net_profit_threshold() const {
    return model_.claim_law()->mean() * nu_ / (1.0 - model_.h_law().mean());
  }

 private:
  double rho_;
  double nu_;
  FixedPointModel model_;
  double u_;
  double z_;
};

struct RuinExponent {
  double theta_dagger = 0.0;
  double theta_c = kInf;
  double x_c = kInf;
  double upper_premium = kInf;  // nu (x_c - 1) / theta_c
};

// Unique positive root of Gamma_C(theta) = rho theta in (0, theta_c).
inline RuinExponent ruin_exponent(const RiskSpec& rs) {
  const auto cp = critical_point(rs.model());
  if (!cp.finite) throw DomainError("ruin_exponent: no finite critical exponent");
  RuinExponent out;
  out.theta_c = cp.theta_c;
  out.x_c = cp.x_c;
  out.upper_premium = rs.nu() * (cp.x_c - 1.0) / cp.theta_c;
  if (!(rs.rho() < out.upper_premium)) {
    throw DomainError("ruin_exponent: premium above nu (x_c - 1) / theta_c, no root below theta_c");
  }
  auto D = [&](double th) { return gamma_marked(rs.nu(), rs.model(), th, cp) - rs.rho() * th; };
  double lo = 0.5 * cp.theta_c;
  while (!(D(lo) < 0.0)) {
    lo *= 0.5;
    if (lo < 1e-300) throw NumericalError("ruin_exponent: no negative bracket near 0");
  }
  out.theta_dagger = roots::bisect(D, lo, cp.theta_c, 1e-13);
  auto dD = [&](double th) { return gamma_marked_derivative(rs.nu(), rs.model(), th, cp) - rs.rho(); };
  out.theta_dagger = roots::polish(D, dD, out.theta_dagger, lo, cp.theta_c, 2);
  return out;
}

// Lambda_C(x) = sup_theta {theta x - Gamma_C(theta)}.
inline double claim_rate_function(const RiskSpec& rs, double x, const CriticalPoint& cp) {
  return legendre(rs.nu(), rs.model(), x, cp).value;
}

struct FiniteHorizonRuin {
  double w = 0.0;
  double theta_dagger = 0.0;
  double breakpoint = kInf;  // 1 / (Gamma_C'(theta_dagger) - rho)
  bool plateau = false;
};

inline FiniteHorizonRuin ruin_finite_horizon(const RiskSpec& rs, double z) {
  if (!(z > 0.0)) throw DomainError("ruin_finite_horizon: z must be > 0");
  const auto ex = ruin_exponent(rs);
  const auto cp = critical_point(rs.model());
  FiniteHorizonRuin out;
  out.theta_dagger = ex.theta_dagger;
  const double step = 1e-6;
  const double gp = (gamma_marked(rs.nu(), rs.model(), ex.theta_dagger + step, cp) -
                     gamma_marked(rs.nu(), rs.model(), ex.theta_dagger - step, cp)) /
                    (2.0 * step);
  out.breakpoint = 1.0 / (gp - rs.rho());
  if (z < out.breakpoint) {
    out.w = z * claim_rate_function(rs, 1.0 / z + rs.rho(), cp);
  } else {
    out.plateau = true;
    out.w = ex.theta_dagger;
  }
  return out;
}

inline FiniteHorizonRuin ruin_finite_horizon(const RiskSpec& rs) { return ruin_finite_horizon(rs, rs.z()); }

struct RegularlyVarying {
  double alpha;
};
struct Gumbel {};
using ClaimTail = std::variant<RegularlyVarying, Gumbel>;

struct HeavyTailRuin {
  double infinite_constant = 0.0;  // lim psi(u) / B0bar(u)
  double finite_factor = 1.0;      // the bracket in the finite-horizon limit
  double finite_constant = 0.0;    // lim psi(u, uT) / B0bar(u)

  // Asymptotic estimates given the integrated-tail value B0bar(u).
  double psi(double b0_bar) const { return infinite_constant * b0_bar; }
  double psi_finite(double b0_bar) const { return finite_constant * b0_bar; }
};

// Subexponential claims: only E[C] enters, so the claim law is given by its mean.
inline HeavyTailRuin ruin_heavy_tail(double nu, double mean_h, double mean_c, double rho, double T,
                                     const ClaimTail& tail) {
  if (!(nu > 0.0) || !(mean_c > 0.0) || !(rho > 0.0)) throw DomainError("ruin_heavy_tail: needs nu, E[C], rho > 0");
  if (!(mean_h >= 0.0 && mean_h < 1.0)) throw DomainError("ruin_heavy_tail: needs 0 <= E[H] < 1");
  if (!(T > 0.0)) throw DomainError("ruin_heavy_tail: T must be > 0");
  const double drift = rho * (1.0 - mean_h);
  const double margin = drift - nu * mean_c;
  if (!(margin > 0.0)) throw DomainError("ruin_heavy_tail: net-profit condition violated");
  HeavyTailRuin out;
  out.infinite_constant = nu * mean_c / margin;
  const double r = margin / drift;
  if (const auto* rv = std::get_if<RegularlyVarying>(&tail)) {
    if (!(rv->alpha > 0.0)) throw DomainError("ruin_heavy_tail: alpha must be > 0");
    out.finite_factor = std::isinf(T) ? 1.0 : 1.0 - std::pow(1.0 + r * T / rv->alpha, -rv->alpha);
  } else {
    out.finite_factor = -std::expm1(-r * T);
  }
  out.finite_constant = out.infinite_constant * out.finite_factor;
  return out;
}

}  // namespace hawkes::ldp
