#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hawkes/ldp.hpp"
#include "hawkes/ruin.hpp"

using namespace hawkes;
using namespace hawkes::ldp;

namespace {

constexpr double kPi = std::numbers::pi;

// Positive root of the quadratic for theta with H ~ Exp(lambda), C ~ Exp(gamma).
double quadratic_theta(double lambda, double gamma, double nu, double rho) {
  const double b = rho * rho * gamma - rho * nu * (1.0 - lambda);
  const double c = rho * nu * gamma * (1.0 - lambda) + lambda * nu * nu;
  return (b - std::sqrt(b * b + 4.0 * rho * rho * c)) / (2.0 * rho * rho);
}

RiskSpec exp_risk(double rho) {
  return RiskSpec(rho, 1.0, NonnegLaw::exponential(4.0), NonnegLaw::exponential(2.0));
}

}  // namespace

TEST(MgfRenewal, TrivialCases) {
  const auto k = Kernel::exponential(1, 2);
  EXPECT_EQ(mgf_renewal(1.0, k, 0.0, 50.0).log_mgf, 0.0);
  EXPECT_EQ(mgf_renewal(1.0, k, 0.1, 0.0).log_mgf, 0.0);
}

TEST(MgfRenewal, ValidityRange) {
  const auto k = Kernel::exponential(1, 2);
  const double th_max = 0.5 - 1.0 - std::log(0.5);
  EXPECT_THROW(mgf_renewal(1.0, k, th_max + 1e-3, 10.0), DomainError);
  EXPECT_THROW(mgf_renewal(1.0, Kernel::exponential(2, 2), 0.1, 10.0), RegimeError);
  EXPECT_NO_THROW(mgf_renewal(1.0, k, th_max - 1e-3, 10.0));
}

TEST(MgfRenewal, PoissonLimit) {
  // Vanishing kernel: log E[e^{theta N_t}] = nu t (e^theta - 1).
  const auto k = Kernel::exponential(1e-12, 1.0);
  const double v = mgf_renewal(2.0, k, 0.4, 3.0).log_mgf;
  EXPECT_NEAR(v, 2.0 * 3.0 * std::expm1(0.4), 1e-9);
}

TEST(MgfRenewal, SlopeMatchesFixedPoint) {
  const auto k = Kernel::exponential(1, 2);
  for (double th : {-0.5, 0.05, 0.1}) {
    const auto r = mgf_renewal(1.0, k, th, 500.0);
    const double gam = gamma_marked(1.0, NonnegLaw::point(0.5), th);
    EXPECT_NEAR(r.log_mgf / 500.0, gam, 0.01 * std::abs(gam)) << th;
  }
}

TEST(MgfRenewal, RichardsonStable) {
  MgfOptions opt;
  opt.richardson_check = true;
  const auto r = mgf_renewal(1.0, Kernel::exponential(1, 2), 0.1, 200.0, opt);
  EXPECT_LT(r.richardson_change, 0.005);
  const auto p = mgf_renewal(1.0, Kernel::power_law(0.5, 2.0), 0.05, 100.0, opt);
  EXPECT_LT(p.richardson_change, 0.005);
}

TEST(CriticalPoint, ExponentialMarks) {
  for (double lam : {1.5, 4.0, 10.0}) {
    const auto cp = critical_point(NonnegLaw::exponential(lam));
    ASSERT_TRUE(cp.finite);
    EXPECT_NEAR(cp.theta_c, std::log((lam + 1) * (lam + 1) / (4 * lam)), 1e-10);
    EXPECT_NEAR(cp.x_c, 0.5 * (lam + 1), 1e-9);
  }
  EXPECT_NEAR(critical_point(NonnegLaw::exponential(4.0)).theta_c, std::log(25.0 / 16.0), 1e-10);
}

TEST(CriticalPoint, DeterministicMarks) {
  for (double h0 : {0.1, 0.5, 0.9}) {
    const auto cp = critical_point(NonnegLaw::point(h0));
    EXPECT_NEAR(cp.theta_c, h0 - 1.0 - std::log(h0), 1e-10);
    EXPECT_NEAR(cp.x_c, 1.0 / h0, 1e-9);
  }
}

TEST(CriticalPoint, WithClaims) {
  // x_c = (lambda+1)/2, M'(x_c-1) = 4 lambda/(lambda+1)^2, gamma/(gamma-theta) = 1/M'.
  const FixedPointModel m(NonnegLaw::exponential(4.0), NonnegLaw::exponential(2.0));
  const auto cp = critical_point(m);
  EXPECT_NEAR(cp.x_c, 2.5, 1e-9);
  EXPECT_NEAR(cp.theta_c, 2.0 * (1.0 - 16.0 / 25.0), 1e-10);
}

TEST(GammaMarked, ExponentialClosedForm) {
  const double lam = 4.0, nu = 1.3;
  const FixedPointModel m(NonnegLaw::exponential(lam));
  const auto cp = critical_point(m);
  EXPECT_EQ(gamma_marked(nu, m, 0.0, cp), 0.0);
  for (double th = -1.0; th <= cp.theta_c - 1e-3; th += 0.01) {
    const double closed = nu * (0.5 * (lam + 1 - std::sqrt((lam + 1) * (lam + 1) - 4 * lam * std::exp(th))) - 1);
    EXPECT_NEAR(gamma_marked(nu, m, th, cp), closed, 1e-8) << th;
  }
  EXPECT_TRUE(std::isinf(gamma_marked(nu, m, cp.theta_c + 1e-3, cp)));
}

TEST(GammaMarked, UniformMarksSatisfyEquation) {
  const FixedPointModel m(NonnegLaw::uniform(0.0, 1.2));
  const auto cp = critical_point(m);
  for (double th : {-2.0, -0.1, 0.05, 0.9 * cp.theta_c}) {
    const auto fp = marked_fixed_point(m, th, cp);
    EXPECT_NEAR(fp.x, std::exp(th) * m.M(fp.x - 1.0), 1e-12);
    EXPECT_LE(fp.x, cp.x_c);
  }
}

TEST(GammaMarked, Convex) {
  const FixedPointModel m(NonnegLaw::exponential(3.0));
  const auto cp = critical_point(m);
  std::vector<double> g;
  const int n = 200;
  for (int i = 0; i <= n; ++i) g.push_back(gamma_marked(1.0, m, -3.0 + (cp.theta_c + 3.0) * i / n, cp));
  for (int i = 1; i < n; ++i) {
    EXPECT_GE(g[i + 1] - 2 * g[i] + g[i - 1], -1e-10);
    EXPECT_GE(g[i + 1], g[i]);
  }
}

TEST(GammaMarked, IterationIsMonotone) {
  // marked_fixed_point throws if an iterate moves the wrong way.
  const FixedPointModel m(NonnegLaw::discrete({0.0, 0.5, 1.5}, {0.3, 0.5, 0.2}));
  const auto cp = critical_point(m);
  for (double th = -4.0; th < cp.theta_c; th += 0.02) EXPECT_NO_THROW(marked_fixed_point(m, th, cp));
}

TEST(GammaMarked, DerivativeMatchesDifference) {
  const FixedPointModel m(NonnegLaw::exponential(4.0));
  const auto cp = critical_point(m);
  for (double th : {-0.5, 0.1, 0.3}) {
    const double h = 1e-6;
    const double fd = (gamma_marked(1.0, m, th + h, cp) - gamma_marked(1.0, m, th - h, cp)) / (2 * h);
    EXPECT_NEAR(gamma_marked_derivative(1.0, m, th, cp), fd, 1e-6 * (1 + std::abs(fd)));
  }
}

TEST(RateLinear, Values) {
  EXPECT_EQ(rate_linear(1.0, 0.5, 2.0), 0.0);
  EXPECT_EQ(rate_linear(1.0, 0.5, 0.0), 1.0);
  EXPECT_TRUE(std::isinf(rate_linear(1.0, 0.5, -1.0)));
  EXPECT_GT(rate_linear(1.0, 0.5, 3.0), 0.0);
}

TEST(RateModerate, Values) {
  EXPECT_EQ(rate_moderate(1.0, 0.5, 0.0), 0.0);
  EXPECT_EQ(rate_moderate(1.0, 0.5, 1.0), 0.0625);
  EXPECT_EQ(rate_moderate(2.0, 0.3, 1.7), rate_moderate(2.0, 0.3, -1.7));
}

TEST(RateMarked, ZeroAtMean) {
  for (const auto& law : {NonnegLaw::exponential(4.0), NonnegLaw::uniform(0.1, 0.7), NonnegLaw::point(0.5)}) {
    const double nu = 1.7;
    EXPECT_NEAR(rate_marked(nu, law, nu / (1.0 - law.mean())).value, 0.0, 1e-10);
  }
}

TEST(RateMarked, ExponentialClosedForm) {
  const double lam = 4.0, nu = 1.0;
  for (int i = 1; i <= 50; ++i) {
    const double x = 0.1 * i;
    const double root = std::sqrt(4 * x * x + nu * nu * (lam + 1) * (lam + 1));
    const double closed = x * std::log((-2 * x * x + x * root) / (lam * nu * nu)) -
                          nu * (0.5 * (lam + 1 - (-2 * x + root) / nu) - 1);
    EXPECT_NEAR(rate_marked(nu, NonnegLaw::exponential(lam), x).value, closed, 1e-6) << x;
  }
  EXPECT_EQ(rate_marked(nu, NonnegLaw::exponential(lam), 0.0).value, nu);
  EXPECT_TRUE(std::isinf(rate_marked(nu, NonnegLaw::exponential(lam), -0.5).value));
}

TEST(RateMarked, LegendreDuality) {
  const double nu = 1.0;
  const FixedPointModel m(NonnegLaw::uniform(0.0, 1.0));
  const auto cp = critical_point(m);
  for (int i = 1; i <= 50; ++i) {
    const double x = 0.12 * i;
    const auto r = rate_marked(nu, m, x, cp);
    const auto sup = legendre(nu, m, x, cp);
    EXPECT_NEAR(r.value, sup.value, 1e-6) << x;
    EXPECT_NEAR(r.theta_star * x - gamma_marked(nu, m, r.theta_star, cp), r.value, 1e-9);
  }
}

TEST(RateMarked, DeterministicReducesToLinear) {
  for (double x = 0.05; x < 8.0; x += 0.25) {
    EXPECT_NEAR(rate_marked(1.5, NonnegLaw::point(0.4), x).value, rate_linear(1.5, 0.4, x), 1e-8) << x;
  }
}

TEST(Ruin, NetProfitCheckedAtConstruction) {
  EXPECT_THROW(exp_risk(0.6), DomainError);
  EXPECT_NO_THROW(exp_risk(0.7));
}

TEST(Ruin, ExponentialClosedForm) {
  for (double rho : {0.8, 1.0, 1.375, 2.0}) {
    const auto r = ruin_exponent(exp_risk(rho));
    EXPECT_NEAR(r.theta_dagger, quadratic_theta(4, 2, 1, rho), 1e-10) << rho;
    EXPECT_GT(r.theta_dagger, 0.0);
    EXPECT_LT(r.theta_dagger, r.theta_c);
  }
  EXPECT_NEAR(ruin_exponent(exp_risk(1.375)).upper_premium, 1.5 / 0.72, 1e-9);
}

TEST(Ruin, SandwichViolated) { EXPECT_THROW(ruin_exponent(exp_risk(2.2)), DomainError); }

TEST(Ruin, VanishesAtNetProfitBoundary) {
  const double edge = 2.0 / 3.0;
  const double a = ruin_exponent(exp_risk(edge + 1e-3)).theta_dagger;
  const double b = ruin_exponent(exp_risk(edge + 1e-5)).theta_dagger;
  EXPECT_LT(b, a);
  EXPECT_LT(b, 1e-3);
  // Slope of Gamma_C at 0 equals the boundary premium.
  const FixedPointModel m(NonnegLaw::exponential(4.0), NonnegLaw::exponential(2.0));
  EXPECT_NEAR(gamma_marked_derivative(1.0, m, 0.0, critical_point(m)), edge, 1e-12);
}

TEST(Ruin, FiniteHorizon) {
  const auto rs = exp_risk(1.375);
  const auto far = ruin_finite_horizon(rs, 1e6);
  EXPECT_TRUE(far.plateau);
  EXPECT_EQ(far.w, far.theta_dagger);
  const double zb = far.breakpoint;
  ASSERT_TRUE(std::isfinite(zb));
  const auto below = ruin_finite_horizon(rs, zb * (1 - 1e-9));
  EXPECT_FALSE(below.plateau);
  EXPECT_NEAR(below.w, far.theta_dagger, 1e-6);
  for (double z : {0.05, 0.2, 0.5 * zb}) EXPECT_GE(ruin_finite_horizon(rs, z).w, far.theta_dagger - 1e-9);
}

TEST(Ruin, HeavyTail) {
  const auto rv = ruin_heavy_tail(1.0, 0.25, 0.5, 1.0, 10.0, RegularlyVarying{1.5});
  EXPECT_DOUBLE_EQ(rv.infinite_constant, 2.0);
  EXPECT_GT(rv.finite_factor, 0.0);
  EXPECT_LT(rv.finite_factor, 1.0);
  EXPECT_NEAR(ruin_heavy_tail(1.0, 0.25, 0.5, 1.0, 1e12, RegularlyVarying{1.5}).finite_constant, 2.0, 1e-6);
  EXPECT_NEAR(ruin_heavy_tail(1.0, 0.25, 0.5, 1.0, 1e12, Gumbel{}).finite_constant, 2.0, 1e-12);
  const double g = ruin_heavy_tail(1.0, 0.25, 0.5, 1.0, 3.0, Gumbel{}).finite_factor;
  EXPECT_NEAR(ruin_heavy_tail(1.0, 0.25, 0.5, 1.0, 3.0, RegularlyVarying{1e8}).finite_factor, g, 1e-7);
  EXPECT_NEAR(g, 1.0 - std::exp(-3.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(rv.psi(0.01), 0.02);
  EXPECT_THROW(ruin_heavy_tail(1.0, 0.25, 0.8, 1.0, 1.0, Gumbel{}), DomainError);
}

TEST(Explosion, SmallTimeConstant) {
  const auto e2 = explosion_small_time(1.0, 2.0, 1.0, 1.0);
  EXPECT_NEAR(e2.c_k, -kPi, 1e-8);
  EXPECT_NEAR(e2.rate_constant, kPi * kPi / 4.0, 1e-7);
  EXPECT_EQ(e2.exponent, 1.0);
  EXPECT_EQ(explosion_small_time(1.0, 3.0, 1.0, 1.0).exponent, 0.5);
  // int_0^inf log(1 + 1/(g y^k h^k)) dy = pi / sin(pi/k) / (g^{1/k} h)
  for (auto [g, k, h] : {std::tuple{2.0, 1.5, 1.0}, std::tuple{0.5, 3.0, 2.0}}) {
    const double expect = -kPi / std::sin(kPi / k) / (std::pow(g, 1.0 / k) * h);
    EXPECT_NEAR(explosion_small_time(g, k, 1.0, h).c_k, expect, 1e-7 * std::abs(expect));
  }
  EXPECT_THROW(explosion_small_time(1.0, 1.0, 1.0, 1.0), DomainError);
}
