// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hawkes/hawkes.hpp"

using namespace hawkes;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

mc::ExperimentSpec linear_spec(double nu, Kernel k, double horizon, std::size_t replicas, std::uint64_t seed) {
  mc::ExperimentSpec s;
  s.sim.rate = RateFn::linear(nu);
  s.sim.kernel = std::move(k);
  s.sim.horizon = horizon;
  s.sim.seed = seed;
  s.replicas = replicas;
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome lln() {
  const auto r = mc::lln_experiment(linear_spec(1, Kernel::exponential(1, 2), 5000, 50, 101), 0.02);
  return {r.comparison.pass, fmt("mean N_T/T = %.5f (theory %.5f, rel err %.4f)", r.comparison.estimate,
                                 r.comparison.theory, r.comparison.rel_error)};
}

Outcome clt() {
  const auto r = mc::clt_experiment(linear_spec(1, Kernel::exponential(1, 2), 2000, 2000, 102), 0.10);
  const double theory = 1.0 / std::pow(1.0 - 0.5, 3);
  const bool ok = r.comparison.pass && std::abs(r.theory - theory) < 1e-12 && r.elapsed <= 300.0;
  return {ok, fmt("variance %.4f (theory %.4f, rel err %.4f), %.1f s", r.variance, theory, r.comparison.rel_error,
                  r.elapsed)};
}

Outcome marked_clt() {
  auto s = linear_spec(1, Kernel::exponential(1, 1), 2000, 2000, 103);
  s.sim.marks = MarkModel{ExponentialHMark{4.0}, std::nullopt};
  const auto r = mc::clt_experiment(s, 0.10);
  // H ~ Exp(4): E[H] = 1/4, Var[H] = 1/16.
  const double theory = (1.0 + 1.0 / 16.0) / std::pow(1.0 - 0.25, 3);
  const bool ok = r.comparison.pass && std::abs(r.theory - theory) < 1e-12;
  return {ok, fmt("variance %.4f (theory %.4f, rel err %.4f)", r.variance, theory, r.comparison.rel_error)};
}

Outcome methods() {
  SimConfig cfg;
  cfg.rate = RateFn::linear(1);
  cfg.kernel = Kernel::exponential(1, 2);
  cfg.horizon = 50;
  std::vector<std::vector<double>> xs;
  std::uint64_t seed = 104;
  for (Method m : {Method::Thinning, Method::MarkovExact, Method::Cluster}) {
    cfg.method = m;
    xs.push_back(run_replicas(5000, seed++, [&](std::size_t, Philox& rng) { return double(simulate(cfg, rng).size()); }));
  }
  const double p01 = stats::ks_two_sample(xs[0], xs[1]).p_value;
  const double p02 = stats::ks_two_sample(xs[0], xs[2]).p_value;
  const double p12 = stats::ks_two_sample(xs[1], xs[2]).p_value;
  const bool ok = p01 > 0.01 && p02 > 0.01 && p12 > 0.01;
  return {ok, fmt("KS p-values thinning/markov %.3f, thinning/cluster %.3f, markov/cluster %.3f", p01, p02, p12)};
}

Outcome mgf() {
  const auto r = mc::mgf_experiment(1.0, Kernel::exponential(1, 2), 0.1, 200, 100000, 105, 0.05);
  return {r.comparison.pass, fmt("renewal %.5f vs sampled %.5f +- %.1e (rel err %.4f; crude %.5f)", r.renewal,
                                 r.estimate, r.std_error, r.comparison.rel_error, r.crude)};
}

Outcome gamma_closed_form() {
  double worst = 0.0, worst_c = 0.0;
  for (double lam : {2.0, 4.0, 9.0}) {
    const double nu = 1.0;
    const ldp::FixedPointModel m(NonnegLaw::exponential(lam));
    const auto cp = ldp::critical_point(m);
    const double tc = std::log((lam + 1) * (lam + 1) / (4 * lam));
    worst_c = std::max(worst_c, std::abs(cp.theta_c - tc));
    for (double th = -1.0; th <= tc - 1e-3; th += 1e-3) {
      const double closed = nu * (0.5 * (lam + 1 - std::sqrt((lam + 1) * (lam + 1) - 4 * lam * std::exp(th))) - 1);
      worst = std::max(worst, std::abs(ldp::gamma_marked(nu, m, th, cp) - closed));
    }
  }
  return {worst <= 1e-8 && worst_c <= 1e-10, fmt("max |Gamma - closed| = %.2e, max |theta_c - closed| = %.2e", worst, worst_c)};
}

Outcome legendre() {
  const double nu = 1.0;
  double worst = 0.0, zero = 0.0;
  for (const auto& law : {NonnegLaw::exponential(4.0), NonnegLaw::uniform(0.0, 1.0)}) {
    const ldp::FixedPointModel m(law);
    const auto cp = ldp::critical_point(m);
    for (int i = 1; i <= 50; ++i) {
      const double x = 0.1 * i;
      worst = std::max(worst, std::abs(ldp::rate_marked(nu, m, x, cp).value - ldp::legendre(nu, m, x, cp).value));
    }
    zero = std::max(zero, std::abs(ldp::rate_marked(nu, m, nu / (1.0 - law.mean()), cp).value));
  }
  return {worst <= 1e-6 && zero <= 1e-10, fmt("max duality gap %.2e, rate at mean %.2e", worst, zero)};
}

Outcome linear_rates() {
  bool ok = true;
  double worst = 0.0;
  for (double nu : {0.5, 1.0, 2.0}) {
    for (double l1 : {0.0, 0.25, 0.5, 0.9}) {
      ok &= ldp::rate_linear(nu, l1, nu / (1.0 - l1)) == 0.0;
      const double j = ldp::rate_moderate(nu, l1, 1.0), closed = std::pow(1.0 - l1, 3) / (2.0 * nu);
      worst = std::max(worst, std::abs(j - closed));
    }
  }
  return {ok && worst == 0.0, fmt("I(mean) == 0: %s; max |J(1) - closed| = %.1e", ok ? "yes" : "no", worst)};
}

Outcome ruin() {
  const double lam = 4, gam = 2, nu = 1, rho = 1.375;
  const double b = rho * rho * gam - rho * nu * (1.0 - lam);
  const double c = rho * nu * gam * (1.0 - lam) + lam * nu * nu;
  const double closed = (b - std::sqrt(b * b + 4.0 * rho * rho * c)) / (2.0 * rho * rho);
  const ldp::RiskSpec rs(rho, nu, NonnegLaw::exponential(lam), NonnegLaw::exponential(gam));
  const auto ex = ldp::ruin_exponent(rs);
  const auto r = mc::ruin_experiment(rs, Kernel::exponential(1, 1), {5, 10, 20, 40}, 20000, 109, 0.15);
  const bool ok = std::abs(ex.theta_dagger - closed) <= 1e-10 && r.slope.pass && r.elapsed <= 600.0;
  return {ok, fmt("theta = %.12f (closed %.12f); slope %.4f vs %.4f (rel err %.4f), %.1f s", ex.theta_dagger, closed,
                  r.fit.slope, -closed, r.slope.rel_error, r.elapsed)};
}

Outcome critical() {
  auto s = linear_spec(1, Kernel::exponential(2, 2), 500, 2000, 110);
  const auto r = mc::critical_experiment(s, 1.0, 0.10);
  const bool ok = r.count_scaling.pass && r.rate_scaling.pass && r.window_mean.pass && r.overdispersed;
  return {ok, fmt("N_T/T^2 %.4f (%.4f), lambda_T/T %.4f (%.4f), window %.4f (%.4f), dispersion %.3f",
                  r.count_scaling.estimate, r.count_scaling.theory, r.rate_scaling.estimate, r.rate_scaling.theory,
                  r.window_mean.estimate, r.window_mean.theory, r.window_dispersion)};
}

Outcome heavy_critical() {
  // c (1 + t)^{-3/2} with unit norm: tail ~ t^{-1/2}.
  auto s = linear_spec(1, Kernel::power_law(0.5, 1.5), 2000, 500, 111);
  s.time_points = {250, 500, 1000, 2000};
  const auto r = mc::heavy_critical_experiment(s, 0.5, 0.15);
  const double count_theory = 1.0 / (std::tgamma(0.5) * std::tgamma(2.5));
  const bool ok = r.count_scaling.pass && r.rate_scaling.pass &&
                  std::abs(r.count_scaling.theory - count_theory) < 1e-12 &&
                  std::abs(r.rate_scaling.theory - 2.0 / kPi) < 1e-12;
  return {ok, fmt("N_T/T^1.5 %.4f (%.4f, rel %.3f), lambda_T/sqrt(T) %.4f (%.4f, rel %.3f)", r.count_scaling.estimate,
                  count_theory, r.count_scaling.rel_error, r.rate_scaling.estimate, 2.0 / kPi,
                  r.rate_scaling.rel_error)};
}

Outcome supercritical() {
  auto s = linear_spec(1, Kernel::exponential(3, 1), 4, 4000, 112);
  s.time_points = {2, 2.5, 3, 3.5, 4};
  const auto r = mc::supercritical_experiment(s, 0.02, 0.10);
  const bool ok = r.growth.pass && r.scaled_rate.pass && std::abs(r.theta - 2.0) < 1e-12 &&
                  std::abs(r.scaled_rate.theory - 1.5) < 1e-10;
  return {ok, fmt("growth %.4f (2, rel %.4f), scaled rate %.4f (1.5, rel %.4f)", r.growth.estimate,
                  r.growth.rel_error, r.scaled_rate.estimate, r.scaled_rate.rel_error)};
}

Outcome explosion() {
  const RateFn rate = RateFn::shifted_power(1, 1, 2);
  const Kernel k = Kernel::exponential(1, 1e-9);
  const bool explosive = analysis::classify(rate, k).regime == analysis::Regime::Explosive;
  mc::ExplosionOptions o;
  o.eps_grid = {0.04, 0.06, 0.08, 0.1, 0.12};
  o.t_grid = {1, 2, 3, 4, 5};
  o.samples = 10000;
  o.tail_tol = 1e-3;
  o.seed = 113;
  const auto r = mc::explosion_experiment(rate, k, 2.0, o, 0.20);
  const bool ok = explosive && r.explosive && r.slope.pass && r.bound_holds;
  return {ok, fmt("explosive %s; small-time exponent %.4f (1, rel %.3f); large-time bound %s", explosive ? "yes" : "no",
                  r.slope.estimate, r.slope.rel_error, r.bound_holds ? "holds" : "violated")};
}

Outcome calibration() {
  const auto fits = run_replicas(20, 114, [](std::size_t, Philox& rng) {
    SimConfig cfg;
    cfg.rate = RateFn::linear(1);
    cfg.kernel = Kernel::exponential(1, 2);
    cfg.horizon = 5000;
    return calibrate::fit_exp(simulate(cfg, rng));
  });
  std::vector<double> en, ea, eb;
  for (const auto& f : fits) {
    en.push_back(std::abs(f.params.nu - 1.0));
    ea.push_back(std::abs(f.params.a - 1.0));
    eb.push_back(std::abs(f.params.b - 2.0) / 2.0);
  }
  const double mn = median(en), ma = median(ea), mb = median(eb);

  SimConfig cfg;
  cfg.rate = RateFn::linear(1);
  cfg.kernel = Kernel::exponential(1, 2);
  cfg.horizon = 500;
  cfg.seed = 115;
  const auto s = simulate(cfg);
  std::mt19937_64 gen(116);
  std::uniform_real_distribution<double> un(0.3, 2.0), ua(0.1, 1.5), ub(0.8, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double nu = un(gen), a = ua(gen), b = ub(gen);
    const auto g = calibrate::loglik_exp_gradient(s, nu, a, b);
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
    const double h = 1e-6;
    const double dn = (calibrate::loglik_exp(s, nu + h, a, b) - calibrate::loglik_exp(s, nu - h, a, b)) / (2 * h);
    const double da = (calibrate::loglik_exp(s, nu, a + h, b) - calibrate::loglik_exp(s, nu, a - h, b)) / (2 * h);
    const double db = (calibrate::loglik_exp(s, nu, a, b + h) - calibrate::loglik_exp(s, nu, a, b - h)) / (2 * h);
    worst = std::max({worst, rel(g.d_nu, dn), rel(g.d_a, da), rel(g.d_b, db)});
  }
  const bool ok = mn <= 0.10 && ma <= 0.10 && mb <= 0.10 && worst <= 1e-6;
  return {ok, fmt("median rel errors nu %.4f a %.4f b %.4f; max partial mismatch %.2e", mn, ma, mb, worst)};
}

Outcome bartlett() {
  const auto r = mc::bartlett_experiment(1, 2, 1, {0.5, 1.0, 2.0}, 1e6, 117, 0.1, 1e4, 50.0, 0.15);
  std::string d;
  for (std::size_t i = 0; i < r.comparisons.size(); ++i)
    d += fmt("%stau=%.1f %.4f (%.4f)", i ? ", " : "", r.estimate.lags[i], r.comparisons[i].estimate, r.theory[i]);
  bool ok = r.pass;
  for (std::size_t i = 0; i < r.theory.size(); ++i) {
    const double tau = r.estimate.lags[i];
    ok &= std::abs(r.theory[i] - 1.0 * 1.0 * 2.0 * 3.0 / 2.0 * std::exp(-tau)) < 1e-12;
  }
  return {ok, d};
}

Outcome properties() {
  std::vector<std::string> bad;
  // Convexity and monotonicity of Gamma.
  {
    const ldp::FixedPointModel m(NonnegLaw::exponential(3.0));
    const auto cp = ldp::critical_point(m);
    std::vector<double> g;
    for (int i = 0; i <= 400; ++i) g.push_back(ldp::gamma_marked(1.0, m, -3.0 + (cp.theta_c + 3.0) * i / 400.0, cp));
    for (int i = 1; i < 400; ++i) {
      if (g[i + 1] - 2 * g[i] + g[i - 1] < -1e-10 || g[i + 1] < g[i]) {
        bad.push_back("convexity");
        break;
      }
    }
  }
  // The fixed-point iteration throws if an iterate moves the wrong way.
  try {
    for (const auto& law : {NonnegLaw::discrete({0.0, 0.5, 1.5}, {0.3, 0.5, 0.2}), NonnegLaw::uniform(0.0, 1.2),
                            NonnegLaw::exponential(2.5)}) {
      const ldp::FixedPointModel m(law);
      const auto cp = ldp::critical_point(m);
      for (double th = -4.0; th < cp.theta_c; th += 0.01) {
        const auto fp = ldp::marked_fixed_point(m, th, cp);
        if (!(fp.x <= cp.x_c) || std::abs(fp.x - std::exp(th) * m.M(fp.x - 1.0)) > 1e-10) throw NumericalError("fixed point");
      }
    }
  } catch (const Error&) {
    bad.push_back("fixed-point monotonicity");
  }
  // Strict ordering of simulated streams, every method and a nonlinear rate.
  {
    SimConfig cfg;
    cfg.rate = RateFn::linear(1);
    cfg.kernel = Kernel::exponential(1, 2);
    cfg.horizon = 200;
    bool ordered = true;
    auto check = [&](const EventStream& s) {
      for (std::size_t i = 1; i < s.size(); ++i) ordered &= s.times()[i] > s.times()[i - 1];
      for (double t : s.times()) ordered &= t >= 0 && t < s.horizon();
    };
    for (Method m : {Method::Thinning, Method::MarkovExact, Method::Cluster}) {
      cfg.method = m;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        check(simulate(cfg));
      }
    }
    cfg.method = Method::Auto;
    cfg.rate = RateFn::sub_power(1, 0.5, 1);
    cfg.kernel = Kernel::power_law(1, 3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      cfg.seed = seed;
      check(simulate(cfg));
    }
    if (!ordered) bad.push_back("stream ordering");
  }
  // Mean of the likelihood ratio under a tilted intensity.
  {
    SimConfig cfg;
    cfg.rate = RateFn::linear(1);
    cfg.kernel = Kernel::exponential(1, 2);
    cfg.horizon = 10;
    const RateFn tilt = RateFn::scaled_linear(0.7, 1.3);
    const auto w = run_replicas(20000, 118, [&](std::size_t, Philox& rng) {
      return std::exp(simulate_tilted(cfg, tilt, rng).log_weight);
    });
    const auto s = MonteCarloSummary::from_samples(w, 118);
    if (std::abs(s.z_score(1.0)) > 3.0) bad.push_back(fmt("likelihood ratio mean %.4f", s.estimate));
  }
  // Thread-count invariance.
  {
    auto spec = linear_spec(1, Kernel::exponential(1, 2), 200, 64, 119);
    spec.threads = 1;
    const auto a = mc::lln_experiment(spec);
    spec.threads = 4;
    const auto b = mc::lln_experiment(spec);
    if (a.samples != b.samples || a.summary.estimate != b.summary.estimate) bad.push_back("thread determinism");
  }
  std::string d = bad.empty() ? "convexity, fixed-point monotonicity, ordering, likelihood ratio, thread determinism" : "";
  for (const auto& b : bad) d += (d.empty() ? "failed: " : ", ") + b;
  return {bad.empty(), d};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"law of large numbers", lln},
      {"central limit variance", clt},
      {"marked central limit variance", marked_clt},
      {"simulation method equivalence", methods},
      {"moment generating function", mgf},
      {"closed-form Gamma", gamma_closed_form},
      {"Legendre duality", legendre},
      {"linear rate functions", linear_rates},
      {"ruin exponent", ruin},
      {"critical regime", critical},
      {"heavy-tailed critical regime", heavy_critical},
      {"super-critical growth", supercritical},
      {"explosion", explosion},
      {"calibration", calibration},
      {"covariance density", bartlett},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%2zu %s %s: %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(), sec);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
