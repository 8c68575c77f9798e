#pragma once

// Replicated Monte Carlo experiments checked against limit theorems.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hawkes/analysis.hpp"
#include "hawkes/ldp.hpp"
#include "hawkes/parallel.hpp"
#include "hawkes/ruin.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/stats.hpp"
#include "hawkes/summary.hpp"

namespace hawkes::mc {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ExperimentSpec {
  SimConfig sim;
  std::string statistic = "count_rate";
  std::size_t replicas = 100;
  std::vector<double> time_points;  // empty means {sim.horizon}
  std::optional<double> theory_value;
  std::string theory_note;
  unsigned threads = 0;

  void validate() const {
    if (replicas < 2) throw DomainError("experiment needs at least 2 replicas");
    for (std::size_t i = 0; i < time_points.size(); ++i) {
      if (!(time_points[i] > 0.0) || !std::isfinite(time_points[i])) throw DomainError("time points must be positive and finite");
      if (i > 0 && !(time_points[i] > time_points[i - 1])) throw DomainError("time points must be increasing");
    }
  }

  double final_time() const { return time_points.empty() ? sim.horizon : time_points.back(); }
};

// Estimate against theory. A comparison with a positive tolerance passes on
// relative error; with tolerance <= 0 it passes on |z| <= 3.
struct Comparison {
  double estimate = 0.0;
  double theory = kNaN;
  double std_error = 0.0;
  double z_score = kNaN;
  double rel_error = kNaN;
  double tolerance = 0.0;
  bool pass = false;
};

inline Comparison compare(double estimate, double std_error, double theory, double tolerance) {
  Comparison c;
  c.estimate = estimate;
  c.std_error = std_error;
  c.theory = theory;
  c.tolerance = tolerance;
  if (std::isnan(theory)) return c;
  c.z_score = std_error > 0.0 ? (estimate - theory) / std_error : (estimate == theory ? 0.0 : kInf);
  c.rel_error = theory != 0.0 ? std::abs(estimate / theory - 1.0) : std::abs(estimate);
  c.pass = tolerance > 0.0 ? c.rel_error <= tolerance : std::abs(c.z_score) <= 3.0;
  return c;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Visit>
hawkes::detail::RunInfo run_visit(const SimConfig& cfg, Philox& rng, Visit&& visit) {
  hawkes::detail::check_common(cfg);
  switch (resolve_method(cfg)) {
    case Method::Thinning:
      return hawkes::detail::run_thinning(cfg, rng, visit);
    case Method::MarkovExact:
      return hawkes::detail::run_markov(cfg, rng, visit);
    case Method::Cluster:
      if (!(cfg.branching_ratio() < 1.0)) throw RegimeError("cluster method needs branching ratio < 1");
      return hawkes::detail::run_cluster(cfg, rng, visit);
    case Method::Auto:
      break;
  }
  throw DomainError("unresolved simulation method");
}

inline double count_events(const SimConfig& cfg, Philox& rng) {
  std::size_t n = 0;
  const auto info = run_visit(cfg, rng, [&](double, double) { ++n; });
  if (info.truncated) throw NumericalError("simulation hit the event cap");
  return static_cast<double>(n);
}

// nu, alpha, E[H], Var[H] for lambda(z) = nu + alpha z with h(t, a) = a g(t).
struct LinearMoments {
  double nu, alpha, mean_h, var_h;
};

inline LinearMoments linear_moments(const SimConfig& cfg) {
  const auto lin = cfg.rate.linear_coefficients();
  if (!lin) throw DomainError("experiment needs a linear rate");
  const double g1 = cfg.kernel.l1_norm();
  const auto law = cfg.scale_law();
  const double c = lin->first * g1;
  return {lin->second, lin->first, c * law.mean(), c * c * law.variance()};
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct LlnReport {
  MonteCarloSummary summary;  // of N_T / T
  Comparison comparison;
  std::vector<double> samples;
};

inline LlnReport lln_experiment(const ExperimentSpec& spec, double tolerance = 0.02) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig cfg = spec.sim;
  cfg.horizon = spec.final_time();
  double theory = kNaN;
  if (spec.theory_value) theory = *spec.theory_value;
  else if (cfg.rate.linear_coefficients()) {
    const auto m = detail::linear_moments(cfg);
    if (!(m.mean_h < 1.0)) throw RegimeError("lln_experiment: needs a sub-critical configuration");
    theory = m.nu / (1.0 - m.mean_h);
  }
  LlnReport r;
  r.samples = run_replicas(
      spec.replicas, cfg.seed, [&](std::size_t, Philox& rng) { return detail::count_events(cfg, rng) / cfg.horizon; },
      spec.threads);
  r.summary = MonteCarloSummary::from_samples(r.samples, cfg.seed, detail::seconds_since(t0));
  r.comparison = compare(r.summary.estimate, r.summary.std_error, theory, tolerance);
  return r;
}

struct CltReport {
  double variance = 0.0;  // of (N_T - mu T) / sqrt(T)
  double theory = kNaN;
  double mean_rate = 0.0;
  stats::Shape shape;
  bool normal_screen = false;  // skewness and excess kurtosis within 3 standard errors
  Comparison comparison;
  std::vector<double> samples;
  double elapsed = 0.0;
};

inline CltReport clt_experiment(const ExperimentSpec& spec, double tolerance = 0.10) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig cfg = spec.sim;
  const double T = cfg.horizon = spec.final_time();
  const auto m = detail::linear_moments(cfg);
  if (!(m.mean_h < 1.0)) throw RegimeError("clt_experiment: needs a sub-critical configuration");
  const double mu = m.nu / (1.0 - m.mean_h);
  CltReport r;
  r.mean_rate = mu;
  r.theory = spec.theory_value ? *spec.theory_value : m.nu * (1.0 + m.var_h) / std::pow(1.0 - m.mean_h, 3);
  const double rt = std::sqrt(T);
  r.samples = run_replicas(
      spec.replicas, cfg.seed, [&](std::size_t, Philox& rng) { return (detail::count_events(cfg, rng) - mu * T) / rt; },
      spec.threads);
  r.variance = stats::variance(r.samples);
  r.shape = stats::shape(r.samples);
  r.normal_screen = std::abs(r.shape.skewness) <= 3 * r.shape.skewness_se &&
                    std::abs(r.shape.excess_kurtosis) <= 3 * r.shape.kurtosis_se;
  const double se = r.variance * std::sqrt((2.0 + r.shape.excess_kurtosis) / static_cast<double>(r.samples.size()));
  r.comparison = compare(r.variance, se, r.theory, tolerance);
  r.elapsed = detail::seconds_since(t0);
  return r;
}

// ---------------------------------------------------------------------------

struct SigmaReport {
  double sigma2 = 0.0;
  double mean = 0.0;                // per unit interval
  std::vector<double> partial;      // sigma^2 truncated at lag 0, 1, ..., lag_max
  double plateau_change = 0.0;      // |partial[lag_max] / partial[lag_max / 2] - 1|
  std::size_t intervals = 0;
};

// Unit-interval counts after `burn_in`; sigma^2 = c_0 + 2 sum_{j=1}^{lag_max} c_j
// with autocovariances pooled over the streams around the pooled mean.
inline SigmaReport sigma_empirical(std::span<const EventStream> streams, std::size_t lag_max, double burn_in = 0.0) {
  if (streams.empty()) throw DomainError("sigma_empirical: no streams");
  std::vector<std::vector<double>> counts;
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& s : streams) {
    const auto m = static_cast<std::size_t>(std::floor(s.horizon() - burn_in));
    if (s.horizon() <= burn_in || m <= lag_max) throw DomainError("sigma_empirical: stream too short for lag_max");
    std::vector<double> c(m, 0.0);
    for (double t : s.times()) {
      if (t < burn_in) continue;
      const auto j = static_cast<std::size_t>(t - burn_in);
      if (j < m) c[j] += 1.0;
    }
    for (double x : c) total += x;
    n += m;
    counts.push_back(std::move(c));
  }
  SigmaReport r;
  r.mean = total / static_cast<double>(n);
  r.intervals = n;
  double acc = 0.0;
  for (std::size_t lag = 0; lag <= lag_max; ++lag) {
    double s = 0.0;
    std::size_t pairs = 0;
    for (const auto& c : counts) {
      for (std::size_t i = 0; i + lag < c.size(); ++i) s += (c[i] - r.mean) * (c[i + lag] - r.mean);
      pairs += c.size() - lag;
    }
    const double cov = s / static_cast<double>(pairs);
    acc += lag == 0 ? cov : 2.0 * cov;
    r.partial.push_back(acc);
  }
  r.sigma2 = acc;
  const double half = r.partial[lag_max / 2];
  r.plateau_change = half != 0.0 ? std::abs(acc / half - 1.0) : 0.0;
  return r;
}

struct CovarianceEstimate {
  std::vector<double> lags;
  std::vector<double> values;
  double rate = 0.0;
  double observed_time = 0.0;
};

// Pair-count estimate of the covariance density c(tau): pairs with gap in
// [tau - bin/2, tau + bin/2) per unit time and bin width, minus rate^2.
inline CovarianceEstimate covariance_density(std::span<const EventStream> streams, std::span<const double> lags,
                                             double bin, double burn_in = 0.0) {
  if (streams.empty() || lags.empty()) throw DomainError("covariance_density: nothing to estimate");
  if (!(bin > 0.0)) throw DomainError("covariance_density: bin must be positive");
  const double reach = *std::max_element(lags.begin(), lags.end()) + 0.5 * bin;
  CovarianceEstimate out;
  out.lags.assign(lags.begin(), lags.end());
  std::vector<double> pairs(lags.size(), 0.0);
  double events = 0.0, observed = 0.0, window = 0.0;
  for (const auto& s : streams) {
    const auto& t = s.times();
    const double end = s.horizon() - reach;
    if (!(end > burn_in)) throw DomainError("covariance_density: stream shorter than burn-in plus lag");
    observed += s.horizon() - burn_in;
    window += end - burn_in;
    const auto first = std::lower_bound(t.begin(), t.end(), burn_in) - t.begin();
    events += static_cast<double>(t.size() - first);
    for (std::size_t k = 0; k < lags.size(); ++k) {
      const double lo = lags[k] - 0.5 * bin, hi = lags[k] + 0.5 * bin;
      std::size_t a = first, b = first;
      for (std::size_t i = first; i < t.size() && t[i] < end; ++i) {
        while (a < t.size() && t[a] - t[i] < lo) ++a;
        while (b < t.size() && t[b] - t[i] < hi) ++b;
        const std::size_t from = std::max(a, i + 1);
        if (b > from) pairs[k] += static_cast<double>(b - from);
      }
    }
  }
  out.rate = events / observed;
  out.observed_time = observed;
  for (std::size_t k = 0; k < lags.size(); ++k) out.values.push_back(pairs[k] / (window * bin) - out.rate * out.rate);
  return out;
}

struct BartlettReport {
  CovarianceEstimate estimate;
  std::vector<double> theory;
  std::vector<Comparison> comparisons;
  bool pass = false;
};

// Stationary segments of lambda = nu + sum a e^{-b (t - tau_i)} against the
// closed-form covariance density.
inline BartlettReport bartlett_experiment(double a, double b, double nu, std::vector<double> lags, double total_time,
                                          std::uint64_t seed, double bin = 0.1, double segment = 1e4,
                                          double burn_in = 50.0, double tolerance = 0.15, unsigned threads = 0) {
  const auto segments = static_cast<std::size_t>(std::ceil(total_time / segment));
  SimConfig cfg;
  cfg.rate = RateFn::linear(nu);
  cfg.kernel = Kernel::exponential(a, b);
  cfg.horizon = segment + burn_in;
  cfg.method = Method::MarkovExact;
  const auto streams = run_replicas(segments, seed, [&](std::size_t, Philox& rng) { return simulate_markov(cfg, rng); },
                                    threads);
  BartlettReport r;
  r.estimate = covariance_density(streams, lags, bin, burn_in);
  r.pass = true;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    r.theory.push_back(analysis::exp_covariance_density(a, b, nu, lags[k]));
    r.comparisons.push_back(compare(r.estimate.values[k], 0.0, r.theory.back(), tolerance));
    r.pass = r.pass && r.comparisons.back().pass;
  }
  return r;
}

// ---------------------------------------------------------------------------

struct MgfReport {
  double theta = 0.0;
  double t = 0.0;
  double renewal = 0.0;         // (1/t) log E[e^{theta N_t}] from the renewal solver
  double estimate = 0.0;        // importance-sampled (1/t) log E[e^{theta N_t}]
  double std_error = 0.0;
  double crude = 0.0;           // plain sample average, biased low for large theta t
  double tilt = 1.0;            // intensity multiplier of the sampling measure
  Comparison comparison;
};

// Samples under lambda^ = x lambda with x = f(theta), the fixed point
// x = e^{theta + |h|_1 (x - 1)}, and reweights by dP/dP^.
inline MgfReport mgf_experiment(double nu, const Kernel& k, double theta, double t, std::size_t replicas,
                                std::uint64_t seed, double tolerance = 0.05, double grid_step = 0.01,
                                unsigned threads = 0) {
  MgfReport r;
  r.theta = theta;
  r.t = t;
  const double l1 = k.l1_norm();
  ldp::MgfOptions opt;
  opt.grid_step = grid_step;
  r.renewal = ldp::mgf_renewal(nu, k, theta, t, opt).log_mgf / t;
  const ldp::FixedPointModel model(NonnegLaw::point(l1));
  const auto fp = ldp::marked_fixed_point(model, theta, ldp::critical_point(model));
  if (!fp.finite) throw DomainError("mgf_experiment: theta beyond the critical value");
  r.tilt = fp.x;
  SimConfig cfg;
  cfg.rate = RateFn::linear(nu);
  cfg.kernel = k;
  cfg.horizon = t;
  const RateFn tilted = RateFn::scaled_linear(fp.x, fp.x * nu);
  const auto logs = run_replicas(
      replicas, seed,
      [&](std::size_t, Philox& rng) {
        const auto run = simulate_tilted(cfg, tilted, rng);
        return theta * static_cast<double>(run.stream.size()) + run.log_weight;
      },
      threads);
  const double shift = *std::max_element(logs.begin(), logs.end());
  std::vector<double> w(logs.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logs[i] - shift);
  const double mw = stats::mean(w);
  r.estimate = (shift + std::log(mw)) / t;
  r.std_error = std::sqrt(stats::variance(w) / static_cast<double>(w.size())) / mw / t;
  const auto crude = run_replicas(
      std::min<std::size_t>(replicas, 20000), seed ^ 0x9e3779b97f4a7c15ULL,
      [&](std::size_t, Philox& rng) { return theta * detail::count_events(cfg, rng); }, threads);
  const double cs = *std::max_element(crude.begin(), crude.end());
  double acc = 0.0;
  for (double x : crude) acc += std::exp(x - cs);
  r.crude = (cs + std::log(acc / static_cast<double>(crude.size()))) / t;
  r.comparison = compare(r.renewal, 0.0, r.estimate, tolerance);
  return r;
}

// ---------------------------------------------------------------------------

struct CriticalReport {
  double m = 0.0;  // int t h(t) dt
  double window_s = 1.0;
  Comparison count_scaling;   // E[N_T] / T^2 vs nu / (2 m)
  Comparison rate_scaling;    // E[lambda_T] / T vs nu / m
  Comparison window_mean;     // E[N[T, T + s/T]] vs nu s / m
  double window_dispersion = 0.0;  // variance / mean of the window count
  bool overdispersed = false;      // dispersion > 1.2
  double polya_shape = 0.0;        // 1 / (2 m^2)
  double polya_scale = 0.0;        // 2 nu m
  double elapsed = 0.0;
};

inline CriticalReport critical_experiment(const ExperimentSpec& spec, double s = 1.0, double tolerance = 0.10) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto lin = spec.sim.rate.linear_coefficients();
  if (!lin || spec.sim.marks) throw DomainError("critical_experiment: needs an unmarked linear rate");
  const Kernel& k = spec.sim.kernel;
  const double l1 = lin->first * k.l1_norm();
  if (std::abs(l1 - 1.0) > 1e-9) throw RegimeError("critical_experiment: needs |h|_1 = 1");
  const double m = lin->first * analysis::first_moment(k);
  if (!std::isfinite(m)) throw DomainError("critical_experiment: needs a finite first moment");
  const double nu = lin->second;
  const double T = spec.final_time();
  SimConfig cfg = spec.sim;
  cfg.horizon = T + s / T;
  const auto rows = run_replicas(
      spec.replicas, cfg.seed,
      [&](std::size_t, Philox& rng) {
        std::array<double, 3> acc{0.0, 0.0, 0.0};
        const auto info = hawkes::detail::run_cluster(cfg, rng, [&](double t, double a) {
          if (t < T) {
            acc[0] += 1.0;
            acc[1] += a * k.value_unchecked(T - t);
          } else {
            acc[2] += 1.0;
          }
        });
        if (info.truncated) throw NumericalError("critical_experiment: event cap reached");
        return acc;
      },
      spec.threads);
  std::vector<double> nt, lt, w;
  for (const auto& r : rows) {
    nt.push_back(r[0] / (T * T));
    lt.push_back((nu + lin->first * r[1]) / T);
    w.push_back(r[2]);
  }
  auto se = [](const std::vector<double>& x) { return std::sqrt(stats::variance(x) / static_cast<double>(x.size())); };
  CriticalReport r;
  r.m = m;
  r.window_s = s;
  r.count_scaling = compare(stats::mean(nt), se(nt), nu / (2.0 * m), tolerance);
  r.rate_scaling = compare(stats::mean(lt), se(lt), nu / m, tolerance);
  r.window_mean = compare(stats::mean(w), se(w), nu * s / m, tolerance);
  r.window_dispersion = stats::variance(w) / stats::mean(w);
  r.overdispersed = r.window_dispersion > 1.2;
  r.polya_shape = 1.0 / (2.0 * m * m);
  r.polya_scale = 2.0 * nu * m;
  r.elapsed = detail::seconds_since(t0);
  return r;
}

struct HeavyCriticalReport {
  double alpha = 0.0;
  Comparison count_scaling;  // N_T / T^{1+alpha}
  Comparison rate_scaling;   // lambda_T / T^alpha
  Comparison loglog_slope;   // of E[N_t] against t, vs 1 + alpha
  std::vector<double> times;
  std::vector<double> mean_counts;
  double elapsed = 0.0;
};

// Kernel tail int_t^inf h ~ t^{-alpha} with |h|_1 = 1.
inline HeavyCriticalReport heavy_critical_experiment(const ExperimentSpec& spec, double alpha, double tolerance = 0.15,
                                                     double slope_tolerance = 0.05) {
  spec.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("heavy_critical_experiment: needs 0 < alpha < 1");
  const auto t0 = std::chrono::steady_clock::now();
  const auto lin = spec.sim.rate.linear_coefficients();
  if (!lin || spec.sim.marks) throw DomainError("heavy_critical_experiment: needs an unmarked linear rate");
  const Kernel& k = spec.sim.kernel;
  if (std::abs(lin->first * k.l1_norm() - 1.0) > 1e-9) throw RegimeError("heavy_critical_experiment: needs |h|_1 = 1");
  const double nu = lin->second;
  std::vector<double> tp = spec.time_points.empty() ? std::vector<double>{spec.sim.horizon} : spec.time_points;
  const double T = tp.back();
  SimConfig cfg = spec.sim;
  cfg.horizon = T;
  const auto rows = run_replicas(
      spec.replicas, cfg.seed,
      [&](std::size_t, Philox& rng) {
        std::vector<double> acc(tp.size() + 1, 0.0);
        const auto info = hawkes::detail::run_cluster(cfg, rng, [&](double t, double a) {
          const auto j = std::upper_bound(tp.begin(), tp.end(), t) - tp.begin();
          acc[j] += 1.0;
          acc.back() += a * k.value_unchecked(T - t);
        });
        if (info.truncated) throw NumericalError("heavy_critical_experiment: event cap reached");
        // bucket counts to cumulative counts N_{t_k}
        std::vector<double> out(tp.size() + 1);
        double c = 0.0;
        for (std::size_t i = 0; i < tp.size(); ++i) out[i] = (c += acc[i]);
        out.back() = nu + lin->first * acc.back();
        return out;
      },
      spec.threads);
  HeavyCriticalReport r;
  r.alpha = alpha;
  r.times = tp;
  std::vector<double> nt, lt;
  for (const auto& row : rows) {
    nt.push_back(row[tp.size() - 1] / std::pow(T, 1.0 + alpha));
    lt.push_back(row.back() / std::pow(T, alpha));
  }
  auto se = [](const std::vector<double>& x) { return std::sqrt(stats::variance(x) / static_cast<double>(x.size())); };
  const double pi = std::numbers::pi;
  r.count_scaling = compare(stats::mean(nt), se(nt), nu / (std::tgamma(1.0 - alpha) * std::tgamma(2.0 + alpha)), tolerance);
  r.rate_scaling = compare(stats::mean(lt), se(lt), nu * std::sin(pi * alpha) / (pi * alpha), tolerance);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    double s = 0.0;
    for (const auto& row : rows) s += row[i];
    r.mean_counts.push_back(s / static_cast<double>(rows.size()));
    lx.push_back(std::log(tp[i]));
    ly.push_back(std::log(r.mean_counts.back()));
  }
  if (tp.size() >= 2) {
    const auto fit = stats::linear_fit(lx, ly);
    Comparison c = compare(fit.slope, fit.slope_se, 1.0 + alpha, 0.0);
    c.tolerance = slope_tolerance;
    c.pass = std::abs(fit.slope - (1.0 + alpha)) <= slope_tolerance;
    r.loglog_slope = c;
  }
  r.elapsed = detail::seconds_since(t0);
  return r;
}

struct SupercriticalReport {
  double theta = 0.0;      // Malthusian parameter
  double m_bar = 0.0;      // int t h(t) e^{-theta t} dt
  Comparison growth;       // slope of log E[lambda_t] over the time points
  Comparison scaled_rate;  // E[lambda_T e^{-theta T}] vs nu / (theta m_bar)
  std::vector<double> times;
  std::vector<double> mean_rates;
  double elapsed = 0.0;
};

inline SupercriticalReport supercritical_experiment(const ExperimentSpec& spec, double growth_tolerance = 0.02,
                                                    double rate_tolerance = 0.10) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto lin = spec.sim.rate.linear_coefficients();
  if (!lin || lin->first != 1.0 || spec.sim.marks) {
    throw DomainError("supercritical_experiment: needs lambda(z) = nu + z without marks");
  }
  const Kernel& k = spec.sim.kernel;
  if (!(k.l1_norm() > 1.0)) throw RegimeError("supercritical_experiment: needs |h|_1 > 1");
  const double nu = lin->second;
  SupercriticalReport r;
  r.theta = analysis::malthusian(k);
  r.m_bar = analysis::laplace_moment(k, r.theta);
  std::vector<double> tp = spec.time_points.empty() ? std::vector<double>{spec.sim.horizon} : spec.time_points;
  SimConfig cfg = spec.sim;
  cfg.horizon = tp.back();
  const auto rows = run_replicas(
      spec.replicas, cfg.seed,
      [&](std::size_t, Philox& rng) {
        std::vector<double> times;
        const auto info = mc::detail::run_visit(cfg, rng, [&](double t, double) { times.push_back(t); });
        if (info.truncated) throw NumericalError("supercritical_experiment: event cap reached");
        std::vector<double> lam(tp.size(), nu);
        for (double t : times) {
          for (std::size_t i = 0; i < tp.size(); ++i) {
            if (t < tp[i]) lam[i] += k.value_unchecked(tp[i] - t);
          }
        }
        return lam;
      },
      spec.threads);
  r.times = tp;
  std::vector<double> ly;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    double s = 0.0;
    for (const auto& row : rows) s += row[i];
    r.mean_rates.push_back(s / static_cast<double>(rows.size()));
    ly.push_back(std::log(r.mean_rates.back()));
  }
  if (tp.size() >= 2) {
    const auto fit = stats::linear_fit(tp, ly);
    r.growth = compare(fit.slope, fit.slope_se, r.theta, growth_tolerance);
  }
  std::vector<double> w;
  for (const auto& row : rows) w.push_back(row.back() * std::exp(-r.theta * tp.back()));
  r.scaled_rate = compare(stats::mean(w), std::sqrt(stats::variance(w) / static_cast<double>(w.size())),
                          nu / (r.theta * r.m_bar), rate_tolerance);
  r.elapsed = detail::seconds_since(t0);
  return r;
}

// ---------------------------------------------------------------------------

struct ExplosionOptions {
  std::vector<double> eps_grid;       // small times for P(tau <= eps)
  std::vector<double> t_grid;         // large times for P(tau >= t)
  std::size_t samples = 10000;
  std::size_t pilot = 64;             // samples per tilt-selection step
  double tail_tol = 1e-3;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct SmallTimeRow {
  double eps = 0.0;
  double tilt = 0.0;
  double probability = 0.0;
  double std_error = 0.0;
  double crude = 0.0;  // untilted frequency
};

struct LargeTimeRow {
  double t = 0.0;
  double survival = 0.0;      // P(tau >= t)
  double decay_rate = kNaN;   // -(1/t) log P(tau >= t)
  bool within_bound = true;   // decay_rate <= lambda(0)
};

struct ExplosionReport {
  bool explosive = false;
  double k = 0.0;
  double expected_slope = 0.0;  // 1/(k-1)
  std::vector<SmallTimeRow> small;
  std::vector<LargeTimeRow> large;
  Comparison slope;             // of log(-log P(tau <= eps)) against log(1/eps)
  bool bound_holds = true;
  double mean_time = 0.0;
  double elapsed = 0.0;
};

// P(tau <= eps) is estimated under the additive tilt lambda + s, with s
// chosen by a pilot bisection so that the tilted mean of tau is eps.
inline ExplosionReport explosion_experiment(const RateFn& rate, const Kernel& kernel, double k,
                                            const ExplosionOptions& opt, double tolerance = 0.20) {
  const auto t0 = std::chrono::steady_clock::now();
  ExplosionReport r;
  r.k = k;
  r.explosive = analysis::classify(rate, kernel).regime == analysis::Regime::Explosive;
  if (!r.explosive) throw RegimeError("explosion_experiment: configuration is not explosive");
  if (!(k > 1.0)) throw DomainError("explosion_experiment: needs k > 1");
  r.expected_slope = 1.0 / (k - 1.0);
  double cap = 0.0;
  for (double t : opt.t_grid) cap = std::max(cap, t);
  for (double e : opt.eps_grid) cap = std::max(cap, e);
  cap = cap > 0.0 ? 2.0 * cap : 1.0;

  const auto plain = run_replicas(
      opt.samples, opt.seed,
      [&](std::size_t, Philox& rng) { return sample_explosion_time(rate, kernel, cap, rng, opt.tail_tol).time; },
      opt.threads);
  double finite_sum = 0.0;
  std::size_t finite_n = 0;
  for (double t : plain) {
    if (std::isfinite(t)) {
      finite_sum += t;
      ++finite_n;
    }
  }
  r.mean_time = finite_n ? finite_sum / static_cast<double>(finite_n) : kInf;
  const double lam0 = rate.value_unchecked(0.0);
  for (double t : opt.t_grid) {
    LargeTimeRow row;
    row.t = t;
    std::size_t c = 0;
    for (double x : plain) c += !(x < t);
    row.survival = static_cast<double>(c) / static_cast<double>(plain.size());
    if (c > 0) {
      row.decay_rate = -std::log(row.survival) / t;
      row.within_bound = row.decay_rate <= lam0;
    }
    r.bound_holds = r.bound_holds && row.within_bound;
    r.large.push_back(row);
  }

  std::uint64_t stream = 1;
  for (double eps : opt.eps_grid) {
    SmallTimeRow row;
    row.eps = eps;
    std::size_t c = 0;
    for (double x : plain) c += x <= eps;
    row.crude = static_cast<double>(c) / static_cast<double>(plain.size());
    const std::uint64_t pilot_seed = opt.seed + 0x1000 * stream++;
    auto tilted_mean = [&](double s) {
      const auto ts = run_replicas(
          opt.pilot, pilot_seed,
          [&](std::size_t, Philox& rng) {
            return sample_explosion_time_tilted(rate, kernel, cap, s, rng, opt.tail_tol).time;
          },
          opt.threads);
      double acc = 0.0;
      for (double t : ts) acc += std::min(t, cap);
      return acc / static_cast<double>(ts.size());
    };
    double lo = -10.0, hi = 20.0;  // log s
    if (tilted_mean(std::exp(lo)) <= eps) hi = lo;
    for (int it = 0; it < 30 && hi - lo > 1e-3; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (tilted_mean(std::exp(mid)) > eps) lo = mid;
      else hi = mid;
    }
    row.tilt = std::exp(hi);
    const auto lw = run_replicas(
        opt.samples, opt.seed + 0x1000 * stream++,
        [&](std::size_t, Philox& rng) {
          const auto smp = sample_explosion_time_tilted(rate, kernel, cap, row.tilt, rng, opt.tail_tol);
          return smp.time <= eps ? smp.log_weight : -kInf;
        },
        opt.threads);
    const double shift = *std::max_element(lw.begin(), lw.end());
    if (std::isfinite(shift)) {
      std::vector<double> w(lw.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(lw[i] - shift);
      const double mw = stats::mean(w);
      row.probability = std::exp(shift) * mw;
      row.std_error = std::exp(shift) * std::sqrt(stats::variance(w) / static_cast<double>(w.size()));
    }
    r.small.push_back(row);
  }
  std::vector<double> x, y;
  for (const auto& row : r.small) {
    if (row.probability > 0.0 && row.probability < 1.0) {
      x.push_back(std::log(1.0 / row.eps));
      y.push_back(std::log(-std::log(row.probability)));
    }
  }
  if (x.size() >= 2) {
    const auto fit = stats::linear_fit(x, y);
    r.slope = compare(fit.slope, fit.slope_se, r.expected_slope, tolerance);
  }
  r.elapsed = detail::seconds_since(t0);
  return r;
}

// ---------------------------------------------------------------------------

struct RuinRow {
  double u = 0.0;
  double psi = 0.0;
  double std_error = 0.0;
};

struct RuinReport {
  double theta_dagger = 0.0;
  double tilt_x = 1.0;  // f_C(theta_dagger)
  std::vector<RuinRow> rows;
  stats::LineFit fit;   // log psi(u) against u
  Comparison slope;     // fitted slope vs -theta_dagger
  double mean_events = 0.0;
  double elapsed = 0.0;
};

// psi(u) = P(u + rho t - sum_{i <= N_t} C_i < 0 for some t) for every u in
// `u_grid`, by sampling under the exponential change of measure at
// theta_dagger: intensity f (nu + Z), H-law tilted by f - 1, claim law
// tilted by theta_dagger. Ruin is certain there and the likelihood ratio at
// the ruin time tau is exp(-theta sum C - (f - 1) sum_i a_i G(tau - tau_i)
// + (f - 1) nu tau), with G the tail integral of the base kernel g.
inline RuinReport ruin_experiment(const ldp::RiskSpec& rs, const Kernel& g, std::vector<double> u_grid,
                                  std::size_t replicas, std::uint64_t seed, double tolerance = 0.15,
                                  unsigned threads = 0, std::size_t max_events = 50'000'000) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!g.is_markovian()) throw DomainError("ruin_experiment: needs an exponential or sum-of-exponentials kernel");
  if (u_grid.empty()) throw DomainError("ruin_experiment: empty reserve grid");
  std::sort(u_grid.begin(), u_grid.end());
  if (u_grid.front() < 0.0) throw DomainError("ruin_experiment: reserves must be >= 0");
  RuinReport r;
  const auto ex = ldp::ruin_exponent(rs);
  const double th = ex.theta_dagger;
  const double x = 1.0 + rs.rho() * th / rs.nu();  // Gamma_C(theta) = rho theta
  r.theta_dagger = th;
  r.tilt_x = x;
  const double g1 = g.l1_norm();
  const NonnegLaw scale_q = rs.h_law().tilted(x - 1.0).scaled(1.0 / g1);
  const NonnegLaw claim_q = rs.claim_law().tilted(th);
  const double nu = rs.nu(), rho = rs.rho();

  struct Path {
    std::vector<double> log_lr;
    double events = 0.0;
  };
  const auto paths = run_replicas(
      replicas, seed,
      [&](std::size_t, Philox& rng) {
        Path p;
        p.log_lr.assign(u_grid.size(), -kInf);
        hawkes::detail::MarkovHistory hist(g);
        double t = 0.0, claims = 0.0;
        std::size_t next_u = 0, n = 0;
        while (next_u < u_grid.size()) {
          const double bound = x * (nu + hist.z());
          t += rng.exponential(bound);
          hist.advance_to(t);
          if (rng.uniform() * bound > x * (nu + hist.z())) continue;
          hist.jump(scale_q.sample(rng));
          claims += claim_q.sample(rng);
          if (++n > max_events) throw NumericalError("ruin_experiment: event cap reached before ruin");
          const double deficit = claims - rho * t;
          if (deficit <= u_grid[next_u]) continue;
          const double lr = -th * claims - (x - 1.0) * hist.pending_mass() + (x - 1.0) * nu * t;
          while (next_u < u_grid.size() && deficit > u_grid[next_u]) p.log_lr[next_u++] = lr;
        }
        p.events = static_cast<double>(n);
        return p;
      },
      threads);
  double ev = 0.0;
  for (const auto& p : paths) ev += p.events;
  r.mean_events = ev / static_cast<double>(paths.size());
  std::vector<double> us, lp;
  for (std::size_t j = 0; j < u_grid.size(); ++j) {
    std::vector<double> w;
    w.reserve(paths.size());
    for (const auto& p : paths) w.push_back(std::exp(p.log_lr[j]));
    RuinRow row;
    row.u = u_grid[j];
    row.psi = stats::mean(w);
    row.std_error = std::sqrt(stats::variance(w) / static_cast<double>(w.size()));
    r.rows.push_back(row);
    if (row.psi > 0.0) {
      us.push_back(row.u);
      lp.push_back(std::log(row.psi));
    }
  }
  if (us.size() >= 2) {
    r.fit = stats::linear_fit(us, lp);
    r.slope = compare(r.fit.slope, r.fit.slope_se, -th, tolerance);
  }
  r.elapsed = detail::seconds_since(t0);
  return r;
}

struct CrudeRuin {
  double horizon = 0.0;
  double psi = 0.0;            // ruin before horizon
  double psi_doubled = 0.0;    // ruin before 2 horizon
  double std_error = 0.0;
  double censoring_bias = 0.0; // (psi_doubled - psi) / psi_doubled
};

// Plain simulation of the risk process up to 2 horizon; no net-profit
// requirement.
inline CrudeRuin crude_ruin(double rho, double nu, const NonnegLaw& h_law, const NonnegLaw& claim_law, const Kernel& g,
                            double u, double horizon, std::size_t replicas, std::uint64_t seed, unsigned threads = 0) {
  if (!g.is_markovian()) throw DomainError("crude_ruin: needs an exponential or sum-of-exponentials kernel");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("crude_ruin: horizon must be finite and > 0");
  if (!(h_law.mean() < 1.0)) throw RegimeError("crude_ruin: needs E[H] < 1");
  const NonnegLaw scale = h_law.scaled(1.0 / g.l1_norm());
  const double end = 2.0 * horizon;
  const auto times = run_replicas(
      replicas, seed,
      [&](std::size_t, Philox& rng) {
        hawkes::detail::MarkovHistory hist(g);
        double t = 0.0, claims = 0.0;
        for (;;) {
          const double bound = nu + hist.z();
          t += rng.exponential(bound);
          if (!(t < end)) return kInf;
          hist.advance_to(t);
          if (rng.uniform() * bound > nu + hist.z()) continue;
          hist.jump(scale.sample(rng));
          claims += claim_law.sample(rng);
          if (u + rho * t - claims < 0.0) return t;
        }
      },
      threads);
  CrudeRuin c;
  c.horizon = horizon;
  std::vector<double> hit;
  std::size_t n2 = 0;
  for (double t : times) {
    hit.push_back(t < horizon ? 1.0 : 0.0);
    n2 += t < end;
  }
  c.psi = stats::mean(hit);
  c.std_error = std::sqrt(c.psi * (1.0 - c.psi) / static_cast<double>(hit.size()));
  c.psi_doubled = static_cast<double>(n2) / static_cast<double>(times.size());
  c.censoring_bias = c.psi_doubled > 0.0 ? (c.psi_doubled - c.psi) / c.psi_doubled : 0.0;
  return c;
}

}  // namespace hawkes::mc
