#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "hawkes/parallel.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/stats.hpp"
#include "hawkes/summary.hpp"

using namespace hawkes;

namespace {

SimConfig base_config(double horizon, Method m = Method::Auto) {
  SimConfig cfg;
  cfg.rate = RateFn::linear(1.0);
  cfg.kernel = Kernel::exponential(1, 2);
  cfg.horizon = horizon;
  cfg.method = m;
  return cfg;
}

std::vector<double> counts(const SimConfig& cfg, std::size_t n, std::uint64_t seed) {
  return run_replicas(n, seed, [&](std::size_t, Philox& rng) { return double(simulate(cfg, rng).size()); });
}

}  // namespace

TEST(Thinning, DegenerateKernelIsPoisson) {
  SimConfig cfg;
  cfg.rate = RateFn::linear(1.5);
  cfg.kernel = Kernel::tabulated({0, 1}, {0, 0});
  cfg.horizon = 10;
  cfg.method = Method::Thinning;
  const auto xs = counts(cfg, 10000, 1);
  const auto s = MonteCarloSummary::from_samples(xs, 1);
  EXPECT_LE(std::abs(s.z_score(15.0)), 3.0);
  EXPECT_NEAR(stats::variance(xs), 15.0, 0.6);
}

TEST(Thinning, LongRunMean) {
  const SimConfig cfg = base_config(5000, Method::Thinning);
  const auto xs = counts(cfg, 10, 2);
  EXPECT_NEAR(stats::mean(xs) / 5000.0, 2.0, 0.04);
}

TEST(Thinning, ZeroHorizonIsEmpty) {
  for (Method m : {Method::Thinning, Method::MarkovExact, Method::Cluster}) {
    const auto s = simulate(base_config(0.0, m));
    EXPECT_TRUE(s.empty());
  }
}

TEST(Thinning, TimeRescalingResidualsAreUnitExponential) {
  // Compensator between events for lambda = nu + Z, Z = sum a e^{-b (t - tau)}.
  const double nu = 1, a = 1, b = 2;
  SimConfig cfg = base_config(4000, Method::Thinning);
  const auto s = simulate_thinning(cfg);
  std::vector<double> gaps;
  double z = 0.0, prev = 0.0;
  for (double t : s.times()) {
    const double dt = t - prev;
    gaps.push_back(nu * dt + z * (1 - std::exp(-b * dt)) / b);
    z = z * std::exp(-b * dt) + a;
    prev = t;
  }
  const auto ks = stats::ks_one_sample(gaps, [](double x) { return 1 - std::exp(-x); });
  EXPECT_GT(ks.p_value, 0.01) << "D=" << ks.statistic;
}

TEST(Thinning, MonotoneCouplingInBaseRate) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SimConfig lo = base_config(50, Method::Thinning), hi = lo;
    hi.rate = RateFn::linear(1.4);
    Philox r1 = replica_stream(seed, 0), r2 = replica_stream(seed, 0);
    const auto n_lo = simulate_thinning(lo, r1).size();
    const auto n_hi = simulate_thinning(hi, r2).size();
    EXPECT_GE(n_hi, n_lo) << "seed " << seed;
  }
}

TEST(Thinning, GeneralKernelWindow) {
  // Power-law kernel goes through the windowed history; compare the mean
  // count with the cluster sampler.
  SimConfig cfg;
  cfg.rate = RateFn::linear(1.0);
  cfg.kernel = Kernel::power_law(1.0, 3.0);  // |h|_1 = 0.5
  cfg.horizon = 50;
  cfg.method = Method::Thinning;
  const auto a = MonteCarloSummary::from_samples(counts(cfg, 1500, 3), 3);
  cfg.method = Method::Cluster;
  const auto b = MonteCarloSummary::from_samples(counts(cfg, 1500, 4), 4);
  EXPECT_LE(std::abs(a.estimate - b.estimate), 3 * std::hypot(a.std_error, b.std_error));
}

TEST(Markov, AgreesWithThinning) {
  SimConfig cfg = base_config(100, Method::Thinning);
  const auto a = MonteCarloSummary::from_samples(counts(cfg, 2000, 5), 5);
  cfg.method = Method::MarkovExact;
  const auto b = MonteCarloSummary::from_samples(counts(cfg, 2000, 6), 6);
  EXPECT_LE(std::abs(a.estimate - b.estimate), a.ci_half_width + b.ci_half_width);
}

TEST(Markov, EmptyTermsArePoisson) {
  SimConfig cfg;
  cfg.rate = RateFn::linear(2.0);
  cfg.kernel = Kernel::sum_exp({});
  cfg.horizon = 10;
  cfg.method = Method::MarkovExact;
  const auto s = MonteCarloSummary::from_samples(counts(cfg, 5000, 7), 7);
  EXPECT_LE(std::abs(s.z_score(20.0)), 3.0);
}

TEST(Markov, Deterministic) {
  SimConfig cfg = base_config(200, Method::MarkovExact);
  cfg.seed = 17;
  const auto a = simulate(cfg), b = simulate(cfg);
  EXPECT_EQ(a.times(), b.times());
  cfg.seed = 18;
  EXPECT_NE(simulate(cfg).times(), a.times());
}

TEST(Markov, RejectsNonMarkovKernel) {
  SimConfig cfg = base_config(10, Method::MarkovExact);
  cfg.kernel = Kernel::power_law(1, 3);
  EXPECT_THROW(simulate(cfg), DomainError);
}

TEST(Cluster, LongRunMean) {
  const SimConfig cfg = base_config(1000, Method::Cluster);
  const auto xs = counts(cfg, 500, 8);
  EXPECT_NEAR(stats::mean(xs) / 1000.0, 2.0, 0.04);
}

TEST(Cluster, NoImmigrantsNoEvents) {
  SimConfig cfg = base_config(100, Method::Cluster);
  cfg.rate = RateFn::linear(0.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    cfg.seed = s;
    EXPECT_TRUE(simulate(cfg).empty());
  }
}

TEST(Cluster, RejectsNonSubcritical) {
  SimConfig cfg = base_config(10, Method::Cluster);
  cfg.kernel = Kernel::exponential(2, 2);
  EXPECT_THROW(simulate(cfg), RegimeError);
}

TEST(Cluster, OffspringCountsArePoisson) {
  // Deterministic marks a0 with a0 |g|_1 = 0.5.
  SimConfig cfg;
  cfg.rate = RateFn::linear(1.0);
  cfg.kernel = Kernel::exponential(1, 1);
  cfg.marks = MarkModel{DeterministicMark{0.5}, std::nullopt};
  cfg.horizon = 60000;
  std::vector<double> times;
  std::vector<int> kids;
  Philox rng(21);
  detail::run_cluster(cfg, rng, [&](double t, double, std::size_t parent) {
    times.push_back(t);
    kids.push_back(0);
    if (parent != static_cast<std::size_t>(-1)) ++kids[parent];
  });
  // Parents far from the horizon lose no children to truncation.
  std::vector<double> observed(5, 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < times.size() && n < 100000; ++i) {
    if (times[i] > cfg.horizon - 60.0) continue;
    observed[std::min(kids[i], 4)] += 1;
    ++n;
  }
  ASSERT_EQ(n, 100000u);
  std::vector<double> p(5);
  double rest = 1.0;
  for (int k = 0; k < 4; ++k) {
    p[k] = std::exp(-0.5) * std::pow(0.5, k) / std::tgamma(k + 1.0);
    rest -= p[k];
  }
  p[4] = rest;
  const auto chi = stats::chi_square_gof(observed, p);
  EXPECT_GT(chi.p_value, 0.01) << "chi2=" << chi.statistic;
}

TEST(Methods, CountDistributionsIndistinguishable) {
  SimConfig cfg = base_config(50);
  std::map<Method, std::vector<double>> xs;
  std::uint64_t seed = 100;
  for (Method m : {Method::Thinning, Method::MarkovExact, Method::Cluster}) {
    cfg.method = m;
    xs[m] = counts(cfg, 2000, seed++);
  }
  EXPECT_GT(stats::ks_two_sample(xs[Method::Thinning], xs[Method::MarkovExact]).p_value, 0.01);
  EXPECT_GT(stats::ks_two_sample(xs[Method::Thinning], xs[Method::Cluster]).p_value, 0.01);
  EXPECT_GT(stats::ks_two_sample(xs[Method::MarkovExact], xs[Method::Cluster]).p_value, 0.01);
}

TEST(Marks, ExponentialHMarksLongRunMean) {
  SimConfig cfg;
  cfg.rate = RateFn::linear(1.0);
  cfg.kernel = Kernel::exponential(1, 1);
  cfg.marks = MarkModel{ExponentialHMark{4.0}, std::nullopt};
  cfg.horizon = 2000;
  for (Method m : {Method::Thinning, Method::MarkovExact, Method::Cluster}) {
    cfg.method = m;
    const auto xs = counts(cfg, 40, 9);
    EXPECT_NEAR(stats::mean(xs) / 2000.0, 4.0 / 3.0, 0.03) << to_string(m);
  }
  const auto s = simulate(cfg);
  ASSERT_TRUE(s.marks().has_value());
  EXPECT_EQ(s.marks()->size(), s.size());
}

TEST(Tilted, IdentityTiltHasZeroWeight) {
  SimConfig cfg = base_config(50);
  Philox rng(3);
  const auto run = simulate_tilted(cfg, cfg.rate, rng);
  EXPECT_EQ(run.log_weight, 0.0);
  EXPECT_GT(run.stream.size(), 0u);
  SimConfig nl = cfg;
  nl.rate = RateFn::sub_power(1, 0.5, 1);
  nl.kernel = Kernel::power_law(1, 3);
  Philox rng2(4);
  EXPECT_EQ(simulate_tilted(nl, nl.rate, rng2).log_weight, 0.0);
}

TEST(Tilted, LikelihoodRatioHasUnitMean) {
  SimConfig cfg = base_config(10);
  const RateFn tilt = RateFn::scaled_linear(0.7, 1.3);
  const auto w = run_replicas(10000, 11, [&](std::size_t, Philox& rng) {
    return std::exp(simulate_tilted(cfg, tilt, rng).log_weight);
  });
  const auto s = MonteCarloSummary::from_samples(w, 11);
  EXPECT_LE(std::abs(s.z_score(1.0)), 3.0) << s.estimate << " +- " << s.std_error;
}

TEST(Tilted, NonlinearRateLikelihoodRatioHasUnitMean) {
  SimConfig cfg;
  cfg.rate = RateFn::sub_power(1, 0.5, 1);
  cfg.kernel = Kernel::exponential(1, 1);
  cfg.horizon = 5;
  const RateFn tilt = RateFn::sub_power(1.2, 0.6, 1);
  const auto w = run_replicas(4000, 12, [&](std::size_t, Philox& rng) {
    return std::exp(simulate_tilted(cfg, tilt, rng).log_weight);
  });
  const auto s = MonteCarloSummary::from_samples(w, 12);
  EXPECT_LE(std::abs(s.z_score(1.0)), 3.0) << s.estimate << " +- " << s.std_error;
}

TEST(Tilted, ImportanceSampledMeanMatchesDirect) {
  SimConfig cfg = base_config(10);
  const RateFn tilt = RateFn::scaled_linear(0.7, 1.3);
  const auto is = run_replicas(10000, 13, [&](std::size_t, Philox& rng) {
    const auto r = simulate_tilted(cfg, tilt, rng);
    return double(r.stream.size()) * std::exp(r.log_weight);
  });
  const auto a = MonteCarloSummary::from_samples(is, 13);
  const auto b = MonteCarloSummary::from_samples(counts(cfg, 10000, 14), 14);
  EXPECT_LE(std::abs(a.estimate - b.estimate), a.ci_half_width + b.ci_half_width);
}

TEST(Tilted, RejectsVanishingTilt) {
  SimConfig cfg = base_config(10);
  Philox rng(1);
  EXPECT_THROW(simulate_tilted(cfg, RateFn::linear(0.0), rng), DomainError);
}

TEST(Explosion, FiniteTimesForSuperlinearRate) {
  const RateFn r = RateFn::shifted_power(1, 1, 1.5);
  const Kernel k = Kernel::exponential(1, 2);
  const auto res = run_replicas(1000, 15, [&](std::size_t, Philox& rng) {
    return sample_explosion_time(r, k, 1e3, rng, 1e-2).censored ? 0.0 : 1.0;
  });
  EXPECT_GT(stats::mean(res), 0.99);
}

TEST(Explosion, RegimeAndCensoring) {
  Philox rng(1);
  EXPECT_THROW(sample_explosion_time(RateFn::linear(1), Kernel::exponential(1, 2), 10, rng), RegimeError);
  const auto s = sample_explosion_time(RateFn::shifted_power(1, 1, 2), Kernel::exponential(1, 2), 0.0, rng);
  EXPECT_TRUE(s.censored);
}

TEST(Explosion, PureBirthLimitMatchesSeriesMean) {
  // With negligible decay the explosion time is sum_n E_n / lambda(n), whose
  // mean is sum_n 1/(1+n)^2 = pi^2/6 for lambda(z) = (1+z)^2.
  const RateFn r = RateFn::shifted_power(1, 1, 2);
  const Kernel k = Kernel::exponential(1, 1e-9);
  const auto ts = run_replicas(20000, 16, [&](std::size_t, Philox& rng) {
    return sample_explosion_time(r, k, 1e6, rng, 1e-3).time;
  });
  const auto s = MonteCarloSummary::from_samples(ts, 16);
  EXPECT_LE(std::abs(s.z_score(std::numbers::pi * std::numbers::pi / 6)), 3.0) << s.estimate;
}
