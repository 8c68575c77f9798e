#pragma once

// The `hawkes` command line: simulate, analyze, ldp, mc, calibrate, risk.
//
// Exit codes: 0 success, 1 domain/regime/numerical errors (one line
// `error: <code>: <message>` on stderr), 2 configuration and usage errors.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hawkes/analysis.hpp"
#include "hawkes/calibrate.hpp"
#include "hawkes/error.hpp"
#include "hawkes/event_stream.hpp"
#include "hawkes/json_io.hpp"
#include "hawkes/ldp.hpp"
#include "hawkes/mc.hpp"
#include "hawkes/ruin.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes::cli {

using json_io::json;

struct CliConfig {
  std::string subcommand;
  std::string config_path;
  std::string output_path;  // empty: stdout
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  int verbosity = 0;
};

namespace detail {

inline json envelope(const std::string& command, json config) {
  return {{"schema_version", json_io::kSchemaVersion}, {"command", command}, {"config", std::move(config)}};
}

inline json to_json(const MonteCarloSummary& s) {
  return {{"estimate", s.estimate}, {"std_error", s.std_error}, {"ci_half_width", s.ci_half_width},
          {"n_replicas", s.n_replicas}, {"seed", s.seed}, {"elapsed", s.elapsed}};
}

inline json to_json(const mc::Comparison& c) {
  return {{"estimate", c.estimate}, {"theory", c.theory},       {"std_error", c.std_error}, {"z_score", c.z_score},
          {"rel_error", c.rel_error}, {"tolerance", c.tolerance}, {"pass", c.pass}};
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot write `" + path + "`");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

inline void write_json(const CliConfig& cc, std::ostream& out, const json& j) {
  Output o(cc.output_path, out);
  o.stream() << json_io::dump_string(j);
}

inline std::vector<double> grid(double lo, double hi, std::size_t n) {
  if (n < 2) return {lo};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

// ---------------------------------------------------------------------------

inline void cmd_simulate(const CliConfig& cc, std::ostream& out, std::ostream& err) {
  const json raw = json_io::read_file(cc.config_path);
  SimConfig cfg = json_io::parse_sim(json_io::Fields(raw, "config"));
  if (cc.seed) cfg.seed = *cc.seed;
  if (!cc.replicas) {
    const auto s = simulate(cfg);
    if (cc.verbosity > 0) err << "simulate: " << s.size() << " events on [0, " << cfg.horizon << ")\n";
    Output o(cc.output_path, out);
    write_csv(o.stream(), s);
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_replicas(*cc.replicas, cfg.seed, [&](std::size_t, Philox& rng) {
    const auto s = simulate(cfg, rng);
    return std::pair<double, bool>{static_cast<double>(s.size()), s.truncated()};
  });
  std::vector<double> rate;
  std::size_t truncated = 0;
  for (const auto& [n, cut] : rows) {
    rate.push_back(n / cfg.horizon);
    truncated += cut;
  }
  const auto summary = MonteCarloSummary::from_samples(rate, cfg.seed, mc::detail::seconds_since(t0));
  json j = envelope("simulate", json_io::to_json(cfg));
  j["replicas"] = *cc.replicas;
  j["count_rate"] = to_json(summary);
  j["truncated_replicas"] = truncated;
  write_json(cc, out, j);
}

// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  std::string spectrum_path;
  double omega_max = 10.0;
  std::string covariance_path;
  double tau_max = 5.0;
  std::size_t points = 201;
};

inline void cmd_analyze(const CliConfig& cc, const AnalyzeOptions& ao, std::ostream& out) {
  const json raw = json_io::read_file(cc.config_path);
  const SimConfig cfg = json_io::parse_sim(json_io::Fields(raw, "config"));
  const Kernel& k = cfg.kernel;
  const auto rep = analysis::classify(cfg.rate, k);
  json j = envelope("analyze", json_io::to_json(cfg));
  j["regime"] = {{"regime", to_string(rep.regime)},
                 {"slope", rep.slope},
                 {"l1", rep.l1},
                 {"explosive_sum_converges", rep.explosive_sum_converges},
                 {"stability_margin", rep.stability_margin ? json(*rep.stability_margin) : json(nullptr)}};
  json table = {{"l1_norm", k.l1_norm()}, {"is_decreasing", k.is_decreasing()}, {"at_zero", k.at_zero()}};
  table["first_moment"] = analysis::first_moment(k);
  if (std::isfinite(k.l1_norm()) && k.l1_norm() > 0.0) table["truncation_point"] = analysis::truncation_point(k, 1e-6);
  json tails = json::array();
  for (double t : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}) tails.push_back({{"t", t}, {"tail", analysis::tail_integral(k, t)}});
  table["tail_integral"] = tails;
  json lap = json::array();
  for (double th : {0.0, 0.5, 1.0, 2.0}) lap.push_back({{"theta", th}, {"laplace", analysis::laplace(k, th)}});
  table["laplace"] = lap;
  if (rep.regime == analysis::Regime::SuperCritical && rep.slope == 1.0) table["malthusian"] = analysis::malthusian(k);
  j["functionals"] = table;

  const auto lin = cfg.rate.linear_coefficients();
  if (!ao.spectrum_path.empty()) {
    if (!lin || lin->first != 1.0 || cfg.marks) throw DomainError("analyze: the spectrum needs an unmarked linear rate");
    std::ofstream f(ao.spectrum_path);
    if (!f) throw ConfigError("cannot write `" + ao.spectrum_path + "`");
    f << "omega,density\n";
    for (double w : grid(0.0, ao.omega_max, ao.points))
      f << format_double(w) << ',' << format_double(analysis::bartlett_density(k, lin->second, w)) << '\n';
  }
  if (!ao.covariance_path.empty()) {
    const auto* e = std::get_if<ExponentialKernel>(&k.family());
    if (!lin || lin->first != 1.0 || cfg.marks || !e) {
      throw DomainError("analyze: the covariance table needs an unmarked linear rate and an exponential kernel");
    }
    std::ofstream f(ao.covariance_path);
    if (!f) throw ConfigError("cannot write `" + ao.covariance_path + "`");
    f << "tau,covariance\n";
    for (double t : grid(0.0, ao.tau_max, ao.points))
      f << format_double(t) << ',' << format_double(analysis::exp_covariance_density(e->a, e->b, lin->second, t)) << '\n';
  }
  write_json(cc, out, j);
}

// ---------------------------------------------------------------------------

struct LdpOptions {
  std::optional<double> mark_exp;    // H ~ Exponential(rate)
  std::optional<double> mark_point;  // H = value
  std::optional<double> claim_exp;
  double nu = 1.0;
  double lo = -1.0;
  std::optional<double> hi;
  std::size_t points = 101;
};

inline ldp::FixedPointModel ldp_model(const LdpOptions& o) {
  if (o.mark_exp.has_value() == o.mark_point.has_value()) {
    throw ConfigError("ldp: give exactly one of --mark-exp and --mark-point");
  }
  const NonnegLaw h = o.mark_exp ? NonnegLaw::exponential(*o.mark_exp) : NonnegLaw::point(*o.mark_point);
  if (o.claim_exp) return ldp::FixedPointModel(h, NonnegLaw::exponential(*o.claim_exp));
  return ldp::FixedPointModel(h);
}

inline json ldp_config(const LdpOptions& o) {
  json j = {{"nu", o.nu}, {"lo", o.lo}, {"points", o.points}};
  if (o.mark_exp) j["mark_exp"] = *o.mark_exp;
  if (o.mark_point) j["mark_point"] = *o.mark_point;
  if (o.claim_exp) j["claim_exp"] = *o.claim_exp;
  if (o.hi) j["hi"] = *o.hi;
  return j;
}

inline void cmd_ldp_gamma(const CliConfig& cc, const LdpOptions& o, std::ostream& out) {
  if (!o.hi) throw ConfigError("ldp gamma: --theta-max is required");
  const auto m = ldp_model(o);
  const auto c = ldp::gamma_curve(o.nu, m, grid(o.lo, *o.hi, o.points));
  Output f(cc.output_path, out);
  f.stream() << "theta,gamma\n";
  for (std::size_t i = 0; i < c.theta_grid.size(); ++i)
    f.stream() << format_double(c.theta_grid[i]) << ',' << format_double(c.gamma_values[i]) << '\n';
}

inline void cmd_ldp_rate(const CliConfig& cc, const LdpOptions& o, std::ostream& out) {
  if (!o.hi) throw ConfigError("ldp rate: --x-max is required");
  const auto m = ldp_model(o);
  const auto cp = ldp::critical_point(m);
  Output f(cc.output_path, out);
  f.stream() << "x,rate\n";
  for (double x : grid(std::max(o.lo, 0.0), *o.hi, o.points))
    f.stream() << format_double(x) << ',' << format_double(ldp::rate_marked(o.nu, m, x, cp).value) << '\n';
}

inline void cmd_ldp_critical(const CliConfig& cc, const LdpOptions& o, std::ostream& out) {
  const auto m = ldp_model(o);
  const auto cp = ldp::critical_point(m);
  json j = envelope("ldp critical", ldp_config(o));
  j["theta_c"] = cp.theta_c;
  j["x_c"] = cp.x_c;
  j["finite"] = cp.finite;
  j["mean_rate"] = o.nu / (1.0 - m.h_law().mean());
  write_json(cc, out, j);
}

// ---------------------------------------------------------------------------

inline ldp::RiskSpec parse_risk(json_io::Fields& f) {
  const double rho = f.num("rho"), nu = f.num("nu");
  const NonnegLaw h = json_io::parse_law(f.sub("h_law"));
  const NonnegLaw c = json_io::parse_law(f.sub("claim_law"));
  const double u = f.num("u", 0.0), z = f.num("z", kInf);
  return ldp::RiskSpec(rho, nu, h, c, u, z);
}

inline json risk_config(const ldp::RiskSpec& rs) {
  return {{"rho", rs.rho()}, {"nu", rs.nu()}, {"h_law", json_io::to_json(rs.h_law())},
          {"claim_law", json_io::to_json(rs.claim_law())}, {"u", rs.u()}, {"z", rs.z()}};
}

inline void cmd_risk(const CliConfig& cc, std::ostream& out) {
  const json raw = json_io::read_file(cc.config_path);
  json_io::Fields f(raw, "config");
  const auto rs = parse_risk(f);
  std::optional<json> heavy_cfg;
  std::optional<ldp::HeavyTailRuin> heavy;
  if (f.has("heavy_tail")) {
    auto h = f.sub("heavy_tail");
    const double T = h.num("T");
    auto tf = h.sub("tail");
    const auto family = tf.str("family");
    ldp::ClaimTail tail = ldp::Gumbel{};
    json tj = {{"family", family}};
    if (family == "regularly_varying") {
      const double alpha = tf.num("alpha");
      tail = ldp::RegularlyVarying{alpha};
      tj["alpha"] = alpha;
    } else if (family != "gumbel") {
      throw ConfigError(tf.path("family") + ": unknown tail `" + family + "`");
    }
    tf.finish();
    h.finish();
    heavy = ldp::ruin_heavy_tail(rs.nu(), rs.h_law().mean(), rs.claim_law().mean(), rs.rho(), T, tail);
    heavy_cfg = json{{"T", T}, {"tail", tj}};
  }
  f.finish();

  json cfg = risk_config(rs);
  if (heavy_cfg) cfg["heavy_tail"] = *heavy_cfg;
  json j = envelope("risk", cfg);
  const auto ex = ldp::ruin_exponent(rs);
  j["ruin_exponent"] = {{"theta_dagger", ex.theta_dagger}, {"theta_c", ex.theta_c}, {"x_c", ex.x_c},
                        {"upper_premium", ex.upper_premium}, {"net_profit_threshold", rs.net_profit_threshold()}};
  j["log_psi_u"] = -ex.theta_dagger * rs.u();
  const auto fh = ldp::ruin_finite_horizon(rs);
  j["finite_horizon"] = {{"w", fh.w}, {"breakpoint", fh.breakpoint}, {"plateau", fh.plateau}};
  if (heavy) {
    j["heavy_tail"] = {{"infinite_constant", heavy->infinite_constant},
                       {"finite_factor", heavy->finite_factor},
                       {"finite_constant", heavy->finite_constant}};
  }
  write_json(cc, out, j);
}

// ---------------------------------------------------------------------------

struct McOptions {
  std::string csv_path;
};

inline void write_columns(const std::string& path, const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& cols) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write `" + path + "`");
  for (std::size_t i = 0; i < names.size(); ++i) f << (i ? "," : "") << names[i];
  f << '\n';
  const std::size_t n = cols.empty() ? 0 : cols.front().size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) f << (i ? "," : "") << format_double(cols[i][r]);
    f << '\n';
  }
}

inline std::vector<double> iota(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return v;
}

inline void cmd_mc(const CliConfig& cc, const McOptions& mo, std::ostream& out, std::ostream& err) {
  const json raw = json_io::read_file(cc.config_path);
  json_io::Fields f(raw, "config");
  const auto kind = f.str("experiment");
  const std::uint64_t file_seed = f.uint("seed", 0);
  const std::size_t file_replicas = f.uint("replicas", 100);
  const std::uint64_t seed = cc.seed.value_or(file_seed);
  const std::size_t replicas = cc.replicas.value_or(file_replicas);
  json cfg = {{"experiment", kind}, {"seed", seed}, {"replicas", replicas}};
  json rep;
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  auto tol = [&](double d) {
    const double t = f.num("tolerance", d);
    cfg["tolerance"] = t;
    return t;
  };
  auto spec = [&] {
    mc::ExperimentSpec s;
    s.sim = json_io::parse_sim(f.sub("sim"));
    s.sim.seed = seed;
    s.replicas = replicas;
    s.time_points = f.nums("time_points", {});
    cfg["sim"] = json_io::to_json(s.sim);
    cfg["time_points"] = s.time_points;
    return s;
  };

  if (kind == "lln") {
    const auto s = spec();
    const auto r = mc::lln_experiment(s, tol(0.02));
    rep = {{"summary", to_json(r.summary)}, {"comparison", to_json(r.comparison)}};
    names = {"replica", "count_rate"};
    cols = {iota(r.samples.size()), r.samples};
  } else if (kind == "clt") {
    const auto s = spec();
    const auto r = mc::clt_experiment(s, tol(0.10));
    rep = {{"variance", r.variance},
           {"theory", r.theory},
           {"mean_rate", r.mean_rate},
           {"skewness", r.shape.skewness},
           {"excess_kurtosis", r.shape.excess_kurtosis},
           {"normal_screen", r.normal_screen},
           {"comparison", to_json(r.comparison)},
           {"elapsed", r.elapsed}};
    names = {"replica", "scaled_deviation"};
    cols = {iota(r.samples.size()), r.samples};
  } else if (kind == "critical") {
    const auto s = spec();
    const double w = f.num("window", 1.0);
    cfg["window"] = w;
    const auto r = mc::critical_experiment(s, w, tol(0.10));
    rep = {{"m", r.m},
           {"count_scaling", to_json(r.count_scaling)},
           {"rate_scaling", to_json(r.rate_scaling)},
           {"window_mean", to_json(r.window_mean)},
           {"window_dispersion", r.window_dispersion},
           {"overdispersed", r.overdispersed},
           {"polya_shape", r.polya_shape},
           {"polya_scale", r.polya_scale},
           {"elapsed", r.elapsed}};
  } else if (kind == "heavy_critical") {
    const auto s = spec();
    const double alpha = f.num("alpha");
    const double st = f.num("slope_tolerance", 0.05);
    cfg["alpha"] = alpha;
    cfg["slope_tolerance"] = st;
    const auto r = mc::heavy_critical_experiment(s, alpha, tol(0.15), st);
    rep = {{"count_scaling", to_json(r.count_scaling)},
           {"rate_scaling", to_json(r.rate_scaling)},
           {"loglog_slope", to_json(r.loglog_slope)},
           {"elapsed", r.elapsed}};
    names = {"t", "mean_count"};
    cols = {r.times, r.mean_counts};
  } else if (kind == "supercritical") {
    const auto s = spec();
    const double gt = f.num("growth_tolerance", 0.02);
    cfg["growth_tolerance"] = gt;
    const auto r = mc::supercritical_experiment(s, gt, tol(0.10));
    rep = {{"theta", r.theta},
           {"m_bar", r.m_bar},
           {"growth", to_json(r.growth)},
           {"scaled_rate", to_json(r.scaled_rate)},
           {"elapsed", r.elapsed}};
    names = {"t", "mean_rate"};
    cols = {r.times, r.mean_rates};
  } else if (kind == "mgf") {
    const double nu = f.num("nu"), theta = f.num("theta"), t = f.num("t");
    const Kernel k = json_io::parse_kernel(f.sub("kernel"));
    const double step = f.num("grid_step", 0.01);
    cfg.update({{"nu", nu}, {"theta", theta}, {"t", t}, {"kernel", json_io::to_json(k)}, {"grid_step", step}});
    const auto r = mc::mgf_experiment(nu, k, theta, t, replicas, seed, tol(0.05), step);
    rep = {{"renewal", r.renewal}, {"estimate", r.estimate}, {"std_error", r.std_error},
           {"crude", r.crude},     {"tilt", r.tilt},         {"comparison", to_json(r.comparison)}};
  } else if (kind == "bartlett") {
    const double a = f.num("a"), b = f.num("b"), nu = f.num("nu");
    const auto lags = f.nums("lags");
    const double total = f.num("total_time"), bin = f.num("bin", 0.1), seg = f.num("segment", 1e4),
                 burn = f.num("burn_in", 50.0);
    cfg.update({{"a", a}, {"b", b}, {"nu", nu}, {"lags", lags}, {"total_time", total}, {"bin", bin},
                {"segment", seg}, {"burn_in", burn}});
    cfg.erase("replicas");
    const auto r = mc::bartlett_experiment(a, b, nu, lags, total, seed, bin, seg, burn, tol(0.15));
    json cs = json::array();
    for (const auto& c : r.comparisons) cs.push_back(to_json(c));
    rep = {{"lags", r.estimate.lags}, {"estimate", r.estimate.values}, {"theory", r.theory},
           {"rate", r.estimate.rate}, {"observed_time", r.estimate.observed_time},
           {"comparisons", cs},       {"pass", r.pass}};
    names = {"lag", "estimate", "theory"};
    cols = {r.estimate.lags, r.estimate.values, r.theory};
  } else if (kind == "explosion") {
    const RateFn rate = json_io::parse_rate(f.sub("rate"));
    const Kernel k = json_io::parse_kernel(f.sub("kernel"));
    const double kk = f.num("k");
    mc::ExplosionOptions opt;
    opt.eps_grid = f.nums("eps_grid");
    opt.t_grid = f.nums("t_grid");
    opt.samples = replicas;
    opt.pilot = f.uint("pilot", opt.pilot);
    opt.tail_tol = f.num("tail_tol", opt.tail_tol);
    opt.seed = seed;
    cfg.update({{"rate", json_io::to_json(rate)}, {"kernel", json_io::to_json(k)}, {"k", kk},
                {"eps_grid", opt.eps_grid}, {"t_grid", opt.t_grid}, {"pilot", opt.pilot}, {"tail_tol", opt.tail_tol}});
    const auto r = mc::explosion_experiment(rate, k, kk, opt, tol(0.20));
    json small = json::array(), large = json::array();
    for (const auto& s : r.small)
      small.push_back({{"eps", s.eps}, {"tilt", s.tilt}, {"probability", s.probability},
                       {"std_error", s.std_error}, {"crude", s.crude}});
    for (const auto& l : r.large)
      large.push_back({{"t", l.t}, {"survival", l.survival}, {"decay_rate", l.decay_rate},
                       {"within_bound", l.within_bound}});
    rep = {{"explosive", r.explosive},   {"expected_slope", r.expected_slope}, {"small_time", small},
           {"large_time", large},        {"slope", to_json(r.slope)},          {"bound_holds", r.bound_holds},
           {"mean_time", r.mean_time},   {"elapsed", r.elapsed}};
    std::vector<double> e, p, se;
    for (const auto& s : r.small) e.push_back(s.eps), p.push_back(s.probability), se.push_back(s.std_error);
    names = {"eps", "probability", "std_error"};
    cols = {e, p, se};
  } else if (kind == "ruin") {
    auto rf = f.sub("risk");
    const auto rs = parse_risk(rf);
    rf.finish();
    const Kernel k = json_io::parse_kernel(f.sub("kernel"));
    const auto us = f.nums("u_grid");
    const std::size_t cap = f.uint("max_events", 50'000'000);
    cfg.update({{"risk", risk_config(rs)}, {"kernel", json_io::to_json(k)}, {"u_grid", us}, {"max_events", cap}});
    const auto r = mc::ruin_experiment(rs, k, us, replicas, seed, tol(0.15), 0, cap);
    std::vector<double> u, psi, se;
    for (const auto& row : r.rows) u.push_back(row.u), psi.push_back(row.psi), se.push_back(row.std_error);
    rep = {{"theta_dagger", r.theta_dagger}, {"tilt_x", r.tilt_x},           {"u", u},
           {"psi", psi},                     {"std_error", se},              {"slope", to_json(r.slope)},
           {"intercept", r.fit.intercept},   {"mean_events", r.mean_events}, {"elapsed", r.elapsed}};
    names = {"u", "psi", "std_error"};
    cols = {u, psi, se};
  } else {
    throw ConfigError("config.experiment: unknown experiment `" + kind + "`");
  }
  f.finish();
  if (cc.verbosity > 0) err << "mc " << kind << ": done\n";
  if (!mo.csv_path.empty()) {
    if (names.empty()) throw ConfigError("mc: experiment `" + kind + "` has no per-replica table for --csv");
    write_columns(mo.csv_path, names, cols);
  }
  json j = envelope("mc", cfg);
  j["report"] = rep;
  write_json(cc, out, j);
}

// ---------------------------------------------------------------------------

struct CalibrateOptions {
  std::string events_path;
  std::optional<double> horizon;
  std::vector<double> init;
};

inline EventStream load_events(const std::string& path, std::optional<double> horizon) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open `" + path + "`");
  if (horizon) return read_csv(in, *horizon);
  // Without a horizon the window ends just after the last event.
  const EventStream s = read_csv(in, std::numeric_limits<double>::max());
  const double end = s.empty() ? 0.0 : std::nextafter(s.times().back(), kInf);
  return EventStream(end, s.times(), s.marks());
}

inline void cmd_calibrate(const CliConfig& cc, const CalibrateOptions& co, std::ostream& out) {
  const auto s = load_events(co.events_path, co.horizon);
  std::optional<calibrate::ExpParams> init;
  if (!co.init.empty()) {
    if (co.init.size() != 3) throw ConfigError("calibrate: --init takes nu,a,b");
    init = calibrate::ExpParams{co.init[0], co.init[1], co.init[2]};
  }
  const auto fit = calibrate::fit_exp(s, init);
  json cfg = {{"events", co.events_path}, {"horizon", s.horizon()}};
  if (init) cfg["init"] = {init->nu, init->a, init->b};
  json j = envelope("calibrate", cfg);
  j["params"] = {{"nu", fit.params.nu}, {"a", fit.params.a}, {"b", fit.params.b}};
  j["loglik"] = fit.loglik;
  j["loglik_init"] = fit.loglik_init;
  j["n_events"] = fit.n_events;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  write_json(cc, out, j);
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Hawkes process toolkit"};
  app.require_subcommand(1);
  CliConfig cc;
  app.add_flag("-v,--verbose", cc.verbosity, "Progress messages on stderr");

  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  auto common = [&](CLI::App* sub, bool config) {
    if (config) sub->add_option("-c,--config", cc.config_path, "JSON configuration")->required();
    sub->add_option("-o,--out", cc.output_path, "Output file (default stdout)");
  };
  auto seeded = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Override the master seed");
    sub->add_option("--replicas", replicas, "Override the replica count");
  };

  auto* sim = app.add_subcommand("simulate", "Simulate one stream (CSV) or a replica summary (JSON)");
  common(sim, true);
  seeded(sim);

  detail::AnalyzeOptions ao;
  auto* ana = app.add_subcommand("analyze", "Regime and kernel functionals");
  common(ana, true);
  ana->add_option("--spectrum", ao.spectrum_path, "Write omega,density CSV");
  ana->add_option("--omega-max", ao.omega_max);
  ana->add_option("--covariance", ao.covariance_path, "Write tau,covariance CSV");
  ana->add_option("--tau-max", ao.tau_max);
  ana->add_option("--points", ao.points);

  detail::LdpOptions lo;
  auto* ldp = app.add_subcommand("ldp", "Large-deviation quantities");
  ldp->require_subcommand(1);
  auto ldp_common = [&](CLI::App* sub) {
    common(sub, false);
    sub->add_option("--mark-exp", lo.mark_exp, "H ~ Exponential(rate)");
    sub->add_option("--mark-point", lo.mark_point, "H equal to a constant");
    sub->add_option("--claim-exp", lo.claim_exp, "Claims ~ Exponential(rate)");
    sub->add_option("--nu", lo.nu);
    sub->add_option("--points", lo.points);
  };
  auto* gam = ldp->add_subcommand("gamma", "theta,gamma CSV");
  ldp_common(gam);
  gam->add_option("--theta-min", lo.lo);
  gam->add_option("--theta-max", lo.hi);
  auto* rate = ldp->add_subcommand("rate", "x,rate CSV");
  ldp_common(rate);
  rate->add_option("--x-min", lo.lo);
  rate->add_option("--x-max", lo.hi);
  auto* crit = ldp->add_subcommand("critical", "Critical point JSON");
  ldp_common(crit);

  detail::McOptions mo;
  auto* mcc = app.add_subcommand("mc", "Monte Carlo experiment");
  common(mcc, true);
  seeded(mcc);
  mcc->add_option("--csv", mo.csv_path, "Per-replica table");

  detail::CalibrateOptions co;
  auto* cal = app.add_subcommand("calibrate", "Exponential-kernel maximum likelihood");
  common(cal, false);
  cal->add_option("events,-e,--events", co.events_path, "Event CSV")->required();
  cal->add_option("--horizon", co.horizon, "Observation window end");
  cal->add_option("--init", co.init, "Initial nu a b")->expected(3)->delimiter(',');

  auto* risk = app.add_subcommand("risk", "Ruin quantities");
  common(risk, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: config: " << e.what() << '\n';
    return 2;
  }
  if (sim->count("--seed") || mcc->count("--seed")) cc.seed = seed;
  if (sim->count("--replicas") || mcc->count("--replicas")) cc.replicas = replicas;

  try {
    if (*sim) detail::cmd_simulate(cc, out, err);
    else if (*ana) detail::cmd_analyze(cc, ao, out);
    else if (*gam) detail::cmd_ldp_gamma(cc, lo, out);
    else if (*rate) detail::cmd_ldp_rate(cc, lo, out);
    else if (*crit) detail::cmd_ldp_critical(cc, lo, out);
    else if (*mcc) detail::cmd_mc(cc, mo, out, err);
    else if (*cal) detail::cmd_calibrate(cc, co, out);
    else if (*risk) detail::cmd_risk(cc, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::Config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hawkes::cli
