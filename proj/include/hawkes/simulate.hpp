#pragma once

// Samplers for Hawkes event streams started from an empty history:
// thinning of a Poisson embedding, exact state-based simulation for
// sum-of-exponentials kernels, immigration-birth (cluster) sampling for
// linear rates, Girsanov-tilted simulation and explosion times.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "hawkes/analysis.hpp"
#include "hawkes/error.hpp"
#include "hawkes/event_stream.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/marks.hpp"
#include "hawkes/markov_state.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/rate.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

enum class Method { Thinning, MarkovExact, Cluster, Auto };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Thinning: return "thinning";
    case Method::MarkovExact: return "markov";
    case Method::Cluster: return "cluster";
    case Method::Auto: return "auto";
  }
  return "?";
}

struct SimConfig {
  RateFn rate;
  Kernel kernel;  // the base kernel g when marks are present
  std::optional<MarkModel> marks;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::size_t max_events = 50'000'000;
  Method method = Method::Auto;

  double base_norm() const { return kernel.l1_norm(); }

  // Law of the scale a in h(t, a) = a g(t); a point mass at 1 without marks.
  NonnegLaw scale_law() const {
    return marks ? marks->scale_law(kernel.l1_norm()) : NonnegLaw::point(1.0);
  }

  // Mean offspring count slope * E[a] * |g|_1 (linear rates only).
  double branching_ratio() const {
    const auto lin = rate.linear_coefficients();
    if (!lin) throw DomainError("branching ratio is defined for linear rates only");
    const double g1 = kernel.l1_norm();
    if (g1 == 0.0) return 0.0;
    return lin->first * scale_law().mean() * g1;
  }
};

namespace detail {

inline void check_common(const SimConfig& cfg) {
  if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) {
    throw DomainError("simulation horizon must be finite and >= 0");
  }
  if (!cfg.kernel.is_decreasing()) {
    throw DomainError("simulation needs a nonincreasing kernel (thinning bound)");
  }
}

// Running Z(s) = sum_i a_i g(s - tau_i) for a sum-of-exponentials kernel.
class MarkovHistory {
 public:
  explicit MarkovHistory(const Kernel& g) : state_(g.exp_terms()) {}
  double now() const { return state_.time(); }
  void advance_to(double s) { state_.advance(s - state_.time()); }
  double z() const { return std::max(state_.total(), 0.0); }
  void jump(double scale) { state_.jump(scale); }
  // int_now^s Z
  double z_integral_to(double s) const { return state_.integral_over(s - state_.time()); }
  // sum_i a_i G(now - tau_i) with G the tail of g.
  double pending_mass() const {
    double m = 0.0;
    for (const auto& c : state_.components()) m += c.z / c.b;
    return m;
  }

 private:
  MarkovState state_;
};

// Z(s) by direct summation over the events younger than a window beyond
// which g is below 1e-13 g(0).
class WindowHistory {
 public:
  explicit WindowHistory(const Kernel& g)
      : g_(&g), window_(analysis::truncation_point(g, 1e-13)) {}
  double now() const { return now_; }
  void advance_to(double s) {
    now_ = s;
    while (!events_.empty() && now_ - events_.front().first > window_) events_.pop_front();
  }
  double z() const {
    double s = 0.0;
    for (const auto& [t, a] : events_) s += a * g_->value_unchecked(now_ - t);
    return s;
  }
  void jump(double scale) { events_.emplace_back(now_, scale); }
  double z_integral_to(double s) const {
    double acc = 0.0;
    for (const auto& [t, a] : events_) acc += a * (g_->tail(now_ - t) - g_->tail(s - t));
    return acc;
  }
  double pending_mass() const {
    double m = 0.0;
    for (const auto& [t, a] : events_) m += a * g_->tail(now_ - t);
    return m;
  }

 private:
  const Kernel* g_;
  double window_;
  double now_ = 0.0;
  std::deque<std::pair<double, double>> events_;
};

// A homogeneous unit-rate Poisson random measure on [0, inf) x [0, inf),
// generated lazily in unit cells [m, m+1) x [j, j+1). Cell (j, m) always
// draws from the same counter-based stream, so runs that share the key see
// the same points whatever bounds they query with.
class PoissonEmbedding {
 public:
  explicit PoissonEmbedding(std::uint64_t key) : key_(key) {}

  // First point (t, y) with t > s, t < horizon and y < bound.
  std::optional<std::pair<double, double>> next(double s, double bound, double horizon) {
    if (!(bound > 0.0)) return std::nullopt;
    auto m = static_cast<std::int64_t>(std::floor(s));
    if (m != block_) load(m);
    for (;;) {
      const double need_d = std::ceil(bound);
      if (need_d > 4e9) throw NumericalError("thinning bound too large for the Poisson embedding");
      const auto need = static_cast<std::uint32_t>(std::max(need_d, 1.0));
      while (pos_ < points_.size() && points_[pos_].first <= s) ++pos_;
      if (need > cells_) {
        const std::size_t old = points_.size();
        for (std::uint32_t j = cells_; j < need; ++j) fill_cell(j, s);
        cells_ = need;
        if (points_.size() > old) std::sort(points_.begin() + static_cast<std::ptrdiff_t>(pos_), points_.end());
      }
      for (std::size_t k = pos_; k < points_.size(); ++k) {
        if (points_[k].first >= horizon) return std::nullopt;
        if (points_[k].second < bound) {
          pos_ = k;
          return points_[k];
        }
      }
      ++m;
      if (static_cast<double>(m) >= horizon) return std::nullopt;
      load(m);
      s = static_cast<double>(m);
    }
  }

 private:
  void load(std::int64_t m) {
    block_ = m;
    cells_ = 0;
    pos_ = 0;
    points_.clear();
  }

  void fill_cell(std::uint32_t j, double after) {
    Philox cell(key_, (static_cast<std::uint64_t>(j) << 32) | static_cast<std::uint32_t>(block_));
    // Poisson(1) count by inversion.
    double u = cell.uniform();
    double p = std::exp(-1.0), cdf = p;
    int n = 0;
    while (u > cdf && n < 64) {
      ++n;
      p /= n;
      cdf += p;
    }
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(block_) + cell.uniform();
      const double y = static_cast<double>(j) + cell.uniform();
      if (t > after) points_.emplace_back(t, y);
    }
  }

  std::uint64_t key_;
  std::int64_t block_ = -1;
  std::uint32_t cells_ = 0;
  std::size_t pos_ = 0;
  std::vector<std::pair<double, double>> points_;
};

struct RunInfo {
  std::size_t events = 0;
  bool truncated = false;
  double z_end = 0.0;  // Z at the horizon
};

// Ogata thinning with exponential candidate gaps against the bound
// lambda(Z(now)), refreshed at every candidate.
template <typename History, typename Visit>
RunInfo ogata(const RateFn& rate, History& hist, const NonnegLaw& scale, double horizon,
              std::size_t max_events, Philox& rng, Visit&& visit) {
  RunInfo info;
  double s = 0.0;
  for (;;) {
    const double bound = rate.value_unchecked(hist.z());
    if (!(bound > 0.0)) break;
    s += rng.exponential(bound);
    if (!(s < horizon)) break;
    hist.advance_to(s);
    const double lam = rate.value_unchecked(hist.z());
    if (rng.uniform() * bound <= lam) {
      if (info.events == max_events) {
        info.truncated = true;
        break;
      }
      const double a = scale.sample(rng);
      visit(s, a);
      hist.jump(a);
      ++info.events;
    }
  }
  if (!info.truncated) hist.advance_to(horizon);
  info.z_end = hist.z();
  return info;
}

// Thinning of the Poisson embedding: a point (t, y) is an event iff
// y < lambda(Z(t-)). The bound only limits which points are inspected.
template <typename History, typename Visit>
RunInfo embedded_thinning(const RateFn& rate, History& hist, const NonnegLaw& scale, double horizon,
                          std::size_t max_events, Philox& rng, Visit&& visit) {
  RunInfo info;
  const std::uint64_t key = (static_cast<std::uint64_t>(rng()) << 32) | rng();
  PoissonEmbedding prm(key);
  double s = 0.0;
  for (;;) {
    const double bound = rate.value_unchecked(hist.z());
    const auto pt = prm.next(s, bound, horizon);
    if (!pt) break;
    s = pt->first;
    hist.advance_to(s);
    if (pt->second < rate.value_unchecked(hist.z())) {
      if (info.events == max_events) {
        info.truncated = true;
        break;
      }
      const double a = scale.sample(rng);
      visit(s, a);
      hist.jump(a);
      ++info.events;
    }
  }
  if (!info.truncated) hist.advance_to(horizon);
  info.z_end = hist.z();
  return info;
}

// Collects visited events into a strictly increasing list.
struct Collector {
  double horizon;
  std::vector<double> times;
  std::vector<double> scales;
  void operator()(double t, double a) {
    if (!times.empty() && !(t > times.back())) t = std::nextafter(times.back(), kInf);
    if (!(t < horizon)) return;
    times.push_back(t);
    scales.push_back(a);
  }
  EventStream finish(const SimConfig& cfg, bool truncated) {
    std::optional<std::vector<double>> marks;
    if (cfg.marks) marks = std::move(scales);
    return EventStream(cfg.horizon, std::move(times), std::move(marks), cfg.seed, truncated);
  }
};

template <typename Visit>
RunInfo run_thinning(const SimConfig& cfg, Philox& rng, Visit&& visit) {
  const NonnegLaw scale = cfg.scale_law();
  if (cfg.kernel.is_markovian()) {
    MarkovHistory h(cfg.kernel);
    return embedded_thinning(cfg.rate, h, scale, cfg.horizon, cfg.max_events, rng, visit);
  }
  WindowHistory h(cfg.kernel);
  return embedded_thinning(cfg.rate, h, scale, cfg.horizon, cfg.max_events, rng, visit);
}

template <typename Visit>
RunInfo run_markov(const SimConfig& cfg, Philox& rng, Visit&& visit) {
  if (!cfg.kernel.is_markovian()) throw DomainError("markov method needs an exponential or sum-of-exponentials kernel");
  MarkovHistory h(cfg.kernel);
  return ogata(cfg.rate, h, cfg.scale_law(), cfg.horizon, cfg.max_events, rng, visit);
}

// Immigration-birth sampling on [0, horizon) for lambda(z) = nu + alpha z.
// Children landing at or after the horizon are dropped together with their
// subtrees, which is exact on [0, horizon) for any branching ratio. Events
// reach `visit` in generation order, not time order.
template <typename Visit>
RunInfo run_cluster(const SimConfig& cfg, Philox& rng, Visit&& visit) {
  const auto lin = cfg.rate.linear_coefficients();
  if (!lin) throw DomainError("cluster method needs a linear rate");
  const auto [alpha, nu] = *lin;
  const double g1 = cfg.kernel.l1_norm();
  const NonnegLaw scale = cfg.scale_law();
  if (alpha > 0.0 && !std::isfinite(g1)) throw DomainError("cluster method needs an integrable kernel");
  RunInfo info;
  const double T = cfg.horizon;
  if (T <= 0.0) return info;

  std::poisson_distribution<long long> immigrants(nu * T);
  const long long n0 = nu > 0.0 ? immigrants(rng) : 0;
  constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
  struct Node {
    double t, a;
    std::size_t id;
  };
  std::vector<Node> stack;
  auto emit = [&](double t, double a, std::size_t parent) -> bool {
    if (info.events == cfg.max_events) {
      info.truncated = true;
      return false;
    }
    // Visitors taking a third argument also receive the parent's index.
    if constexpr (std::is_invocable_v<Visit&, double, double, std::size_t>) visit(t, a, parent);
    else visit(t, a);
    stack.push_back({t, a, info.events});
    ++info.events;
    return true;
  };
  for (long long i = 0; i < n0 && !info.truncated; ++i) {
    emit(rng.uniform() * T, scale.sample(rng), kNoParent);
    while (!stack.empty() && !info.truncated) {
      const auto [t, a, id] = stack.back();
      stack.pop_back();
      const double mean = alpha * a * g1;
      if (!(mean > 0.0)) continue;
      std::poisson_distribution<long long> kids(mean);
      const long long n = kids(rng);
      for (long long c = 0; c < n; ++c) {
        const double child = t + cfg.kernel.sample_lag(rng);
        const double child_scale = scale.sample(rng);
        if (child < T && !emit(child, child_scale, id)) break;
      }
    }
  }
  return info;
}

}  // namespace detail

inline EventStream simulate_thinning(const SimConfig& cfg, Philox& rng) {
  detail::check_common(cfg);
  detail::Collector c{cfg.horizon, {}, {}};
  const auto info = detail::run_thinning(cfg, rng, c);
  return c.finish(cfg, info.truncated);
}

inline EventStream simulate_markov(const SimConfig& cfg, Philox& rng) {
  detail::check_common(cfg);
  detail::Collector c{cfg.horizon, {}, {}};
  const auto info = detail::run_markov(cfg, rng, c);
  return c.finish(cfg, info.truncated);
}

inline EventStream simulate_cluster(const SimConfig& cfg, Philox& rng) {
  detail::check_common(cfg);
  const double m = cfg.branching_ratio();
  if (!(m < 1.0)) {
    throw RegimeError("cluster method needs branching ratio < 1, got " + std::to_string(m));
  }
  std::vector<std::pair<double, double>> ev;
  const auto info = detail::run_cluster(cfg, rng, [&](double t, double a) { ev.emplace_back(t, a); });
  std::sort(ev.begin(), ev.end());
  detail::Collector c{cfg.horizon, {}, {}};
  for (const auto& [t, a] : ev) c(t, a);
  return c.finish(cfg, info.truncated);
}

inline Method resolve_method(const SimConfig& cfg) {
  if (cfg.method != Method::Auto) return cfg.method;
  return cfg.kernel.is_markovian() ? Method::MarkovExact : Method::Thinning;
}

inline EventStream simulate(const SimConfig& cfg, Philox& rng) {
  switch (resolve_method(cfg)) {
    case Method::Thinning: return simulate_thinning(cfg, rng);
    case Method::MarkovExact: return simulate_markov(cfg, rng);
    case Method::Cluster: return simulate_cluster(cfg, rng);
    case Method::Auto: break;
  }
  throw DomainError("unresolved simulation method");
}

// Single-run forms seeded from cfg.seed.
inline EventStream simulate_thinning(const SimConfig& cfg) {
  Philox rng = replica_stream(cfg.seed, 0);
  return simulate_thinning(cfg, rng);
}
inline EventStream simulate_markov(const SimConfig& cfg) {
  Philox rng = replica_stream(cfg.seed, 0);
  return simulate_markov(cfg, rng);
}
inline EventStream simulate_cluster(const SimConfig& cfg) {
  Philox rng = replica_stream(cfg.seed, 0);
  return simulate_cluster(cfg, rng);
}
inline EventStream simulate(const SimConfig& cfg) {
  Philox rng = replica_stream(cfg.seed, 0);
  return simulate(cfg, rng);
}

struct TiltedRun {
  EventStream stream;
  double log_weight = 0.0;  // log dP/dP^ over [0, horizon)
};

// Simulates with lambda replaced by `tilt_rate` and accumulates
// log dP/dP^ = int (lambda^ - lambda)(Z_s) ds + sum_i log(lambda / lambda^)(Z_{tau_i-}).
inline TiltedRun simulate_tilted(const SimConfig& cfg, const RateFn& tilt_rate, Philox& rng) {
  detail::check_common(cfg);
  if (!(tilt_rate(0.0) > 0.0)) throw DomainError("tilt rate must be strictly positive");
  const auto lin = cfg.rate.linear_coefficients();
  const auto lin_hat = tilt_rate.linear_coefficients();
  const bool closed = lin && lin_hat;
  double log_w = 0.0;

  auto run = [&](auto& hist) {
    auto integral = [&](double s1) {
      const double s0 = hist.now();
      if (s1 <= s0) return 0.0;
      if (closed) {
        return (lin_hat->second - lin->second) * (s1 - s0) +
               (lin_hat->first - lin->first) * hist.z_integral_to(s1);
      }
      // Nonlinear rates: quadrature of the rate difference along the decay path.
      auto copy = hist;
      auto f = [&](double s) {
        auto h = copy;
        h.advance_to(s);
        const double z = h.z();
        return tilt_rate.value_unchecked(z) - cfg.rate.value_unchecked(z);
      };
      return quad::integrate(f, s0, s1, 1e-12, 1e-12).value;
    };
    detail::Collector c{cfg.horizon, {}, {}};
    const NonnegLaw scale = cfg.scale_law();
    detail::RunInfo info;
    double s = 0.0;
    for (;;) {
      const double bound = tilt_rate.value_unchecked(hist.z());
      const double next = s + rng.exponential(bound);
      if (!(next < cfg.horizon)) break;
      log_w += integral(next);
      s = next;
      hist.advance_to(s);
      const double z = hist.z();
      const double lam_hat = tilt_rate.value_unchecked(z);
      if (rng.uniform() * bound <= lam_hat) {
        if (info.events == cfg.max_events) {
          info.truncated = true;
          break;
        }
        const double lam = cfg.rate.value_unchecked(z);
        if (!(lam_hat > 0.0)) throw NumericalError("tilted rate vanished at an event; weight undefined");
        log_w += std::log(lam / lam_hat);
        const double a = scale.sample(rng);
        c(s, a);
        hist.jump(a);
        ++info.events;
      }
    }
    if (!info.truncated) log_w += integral(cfg.horizon);
    return c.finish(cfg, info.truncated);
  };

  if (cfg.kernel.is_markovian()) {
    detail::MarkovHistory h(cfg.kernel);
    auto stream = run(h);
    return {std::move(stream), log_w};
  }
  detail::WindowHistory h(cfg.kernel);
  auto stream = run(h);
  return {std::move(stream), log_w};
}

struct ExplosionSample {
  double time = kInf;
  bool censored = false;
  std::size_t events = 0;
  double log_weight = 0.0;  // log dP/dP^ when sampled under an additive tilt
};

// Explosion time sampled with lambda replaced by lambda + tilt (tilt >= 0),
// returning the weight exp(tilt tau) prod_i lambda_i / (lambda_i + tilt).
// The run stops once the expected remaining time 1/lambda(Z) + (1/h(0))
// int_Z^inf dy/lambda(y), which bounds sum_{j>=0} 1/lambda(Z + j h(0)),
// drops below `tail_tol`; that remainder is added to the returned time.
// Its contributions to the log weight cancel to first order.
inline ExplosionSample sample_explosion_time_tilted(const RateFn& rate, const Kernel& k, double cap, double tilt,
                                                    Philox& rng, double tail_tol = 1e-6,
                                                    std::size_t max_events = 100'000'000) {
  if (analysis::classify(rate, k).regime != analysis::Regime::Explosive) {
    throw RegimeError("sample_explosion_time: configuration is not explosive");
  }
  if (!k.is_decreasing()) throw DomainError("sample_explosion_time: kernel must be nonincreasing");
  if (!(cap >= 0.0)) throw DomainError("sample_explosion_time: cap must be >= 0");
  if (!(tilt >= 0.0) || !std::isfinite(tilt)) throw DomainError("sample_explosion_time: tilt must be finite and >= 0");
  ExplosionSample out;
  if (cap == 0.0) {
    out.censored = true;
    return out;
  }
  const double h0 = k.at_zero();
  double log_ratio = 0.0;

  auto run = [&](auto& hist) {
    double s = 0.0;
    for (;;) {
      const double z = hist.z();
      const double lam = rate.value_unchecked(z);
      const double bound = lam + tilt;
      if (out.events > 0) {
        const double remaining = 1.0 / lam + rate.reciprocal_tail(z) / h0;
        if (remaining < tail_tol) {
          out.time = s + remaining;
          out.log_weight = tilt * s + log_ratio;
          if (out.time > cap) {
            out.time = kInf;
            out.censored = true;
          }
          return;
        }
      }
      s += rng.exponential(bound);
      if (s >= cap || out.events >= max_events) {
        out.censored = true;
        out.log_weight = tilt * std::min(s, cap) + log_ratio;
        return;
      }
      hist.advance_to(s);
      const double lam_now = rate.value_unchecked(hist.z());
      if (rng.uniform() * bound <= lam_now + tilt) {
        if (tilt > 0.0) log_ratio += std::log(lam_now / (lam_now + tilt));
        hist.jump(1.0);
        ++out.events;
      }
    }
  };
  if (k.is_markovian()) {
    detail::MarkovHistory h(k);
    run(h);
  } else {
    detail::WindowHistory h(k);
    run(h);
  }
  return out;
}

inline ExplosionSample sample_explosion_time(const RateFn& rate, const Kernel& k, double cap, Philox& rng,
                                             double tail_tol = 1e-6, std::size_t max_events = 100'000'000) {
  return sample_explosion_time_tilted(rate, k, cap, 0.0, rng, tail_tol, max_events);
}

}  // namespace hawkes
