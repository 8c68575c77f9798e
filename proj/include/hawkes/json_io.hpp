#pragma once

// JSON configuration parsing and report writing.
//
// Every object is read through a Fields view that records which keys were
// consumed; finish() rejects anything left over, so a typo in a config file
// is an error instead of a silently ignored default.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkes/error.hpp"
#include "hawkes/event_stream.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/marks.hpp"
#include "hawkes/rate.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes::json_io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing key `" + key + "`");
    used_.insert(key);
    return j_.at(key);
  }

  double num(const std::string& key) { return as_number(at(key), key); }

  double num(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }

  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned()) throw ConfigError(path(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string str(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string str(const std::string& key, const std::string& fallback) { return has(key) ? str(key) : fallback; }

  std::vector<double> nums(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, key));
    return out;
  }

  std::vector<double> nums(const std::string& key, std::vector<double> fallback) {
    return has(key) ? nums(key) : fallback;
  }

  Fields sub(const std::string& key) { return Fields(at(key), path(key)); }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key `" + it.key() + "`");
    }
  }

 private:
  double as_number(const json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
    }
    throw ConfigError(path(key) + ": expected a number");
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open `" + path + "`");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Parsing.

inline NonnegLaw parse_law(Fields f) {
  const auto family = f.str("family");
  NonnegLaw law;
  if (family == "point") law = NonnegLaw::point(f.num("value"));
  else if (family == "exponential") law = NonnegLaw::exponential(f.num("rate"));
  else if (family == "uniform") law = NonnegLaw::uniform(f.num("lo"), f.num("hi"));
  else if (family == "discrete") law = NonnegLaw::discrete(f.nums("values"), f.nums("probs"));
  else throw ConfigError(f.path("family") + ": unknown law `" + family + "`");
  f.finish();
  return law;
}

inline Kernel parse_kernel(Fields f) {
  const auto family = f.str("family");
  Kernel k;
  if (family == "exponential") {
    k = Kernel::exponential(f.num("a"), f.num("b"));
  } else if (family == "sum_exp") {
    const json& terms = f.at("terms");
    if (!terms.is_array()) throw ConfigError(f.path("terms") + ": expected an array");
    std::vector<ExpTerm> ts;
    for (const auto& t : terms) {
      Fields tf(t, f.path("terms[]"));
      ts.push_back({tf.num("a"), tf.num("b")});
      tf.finish();
    }
    k = Kernel::sum_exp(std::move(ts));
  } else if (family == "power_law") {
    k = Kernel::power_law(f.num("c"), f.num("p"));
  } else if (family == "tabulated") {
    std::optional<double> tail;
    if (f.has("tail_exponent")) tail = f.num("tail_exponent");
    k = Kernel::tabulated(f.nums("times"), f.nums("values"), tail);
  } else {
    throw ConfigError(f.path("family") + ": unknown kernel `" + family + "`");
  }
  f.finish();
  return k;
}

inline RateFn parse_rate(Fields f) {
  const auto family = f.str("family");
  RateFn r;
  if (family == "linear") r = RateFn::linear(f.num("nu"));
  else if (family == "scaled_linear") r = RateFn::scaled_linear(f.num("alpha"), f.num("nu"));
  else if (family == "power") r = RateFn::power(f.num("gamma"), f.num("k"), f.num("delta"));
  else if (family == "sub_power") r = RateFn::sub_power(f.num("gamma"), f.num("beta"), f.num("c"));
  else if (family == "shifted_power") r = RateFn::shifted_power(f.num("gamma"), f.num("c"), f.num("k"));
  else if (family == "log") r = RateFn::log_rate(f.num("c"));
  else throw ConfigError(f.path("family") + ": unknown rate `" + family + "`");
  f.finish();
  return r;
}

inline MarkModel parse_marks(Fields f) {
  MarkModel m;
  const auto law = f.str("law");
  if (law == "deterministic") m.mark_law = DeterministicMark{f.num("a0")};
  else if (law == "exponential_h") m.mark_law = ExponentialHMark{f.num("rate")};
  else if (law == "scaled") m.mark_law = ScaledBaseMark{parse_law(f.sub("scale_law"))};
  else throw ConfigError(f.path("law") + ": unknown mark law `" + law + "`");
  if (f.has("claim_law")) m.claim_law = parse_law(f.sub("claim_law"));
  f.finish();
  return m;
}

inline Method parse_method(const std::string& s) {
  if (s == "auto") return Method::Auto;
  if (s == "thinning") return Method::Thinning;
  if (s == "markov") return Method::MarkovExact;
  if (s == "cluster") return Method::Cluster;
  throw ConfigError("unknown method `" + s + "`");
}

inline SimConfig parse_sim(Fields f) {
  SimConfig c;
  c.rate = parse_rate(f.sub("rate"));
  c.kernel = parse_kernel(f.sub("kernel"));
  if (f.has("marks")) c.marks = parse_marks(f.sub("marks"));
  c.horizon = f.num("horizon");
  c.seed = f.uint("seed", 0);
  c.max_events = f.uint("max_events", c.max_events);
  c.method = parse_method(f.str("method", "auto"));
  f.finish();
  return c;
}

// ---------------------------------------------------------------------------
// Serialisation of the resolved configuration.

inline json to_json(const NonnegLaw& law) {
  return std::visit(
      [](const auto& l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMass>) return {{"family", "point"}, {"value", l.value}};
        else if constexpr (std::is_same_v<T, ExponentialLaw>) return {{"family", "exponential"}, {"rate", l.rate}};
        else if constexpr (std::is_same_v<T, UniformLaw>) return {{"family", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
        else return {{"family", "discrete"}, {"values", l.values}, {"probs", l.probs}};
      },
      law.family());
}

inline json to_json(const Kernel& k) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) return {{"family", "exponential"}, {"a", f.a}, {"b", f.b}};
        else if constexpr (std::is_same_v<T, SumExpKernel>) {
          json terms = json::array();
          for (const auto& t : f.terms) terms.push_back({{"a", t.a}, {"b", t.b}});
          return {{"family", "sum_exp"}, {"terms", terms}};
        } else if constexpr (std::is_same_v<T, PowerLawKernel>) {
          return {{"family", "power_law"}, {"c", f.c}, {"p", f.p}};
        } else {
          json j = {{"family", "tabulated"}, {"times", f.times}, {"values", f.values}};
          if (f.tail_exponent) j["tail_exponent"] = *f.tail_exponent;
          return j;
        }
      },
      k.family());
}

inline json to_json(const RateFn& r) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearRate>) return {{"family", "linear"}, {"nu", f.nu}};
        else if constexpr (std::is_same_v<T, ScaledLinearRate>) return {{"family", "scaled_linear"}, {"alpha", f.alpha}, {"nu", f.nu}};
        else if constexpr (std::is_same_v<T, PowerRate>) return {{"family", "power"}, {"gamma", f.gamma}, {"k", f.k}, {"delta", f.delta}};
        else if constexpr (std::is_same_v<T, SubPowerRate>) return {{"family", "sub_power"}, {"gamma", f.gamma}, {"beta", f.beta}, {"c", f.c}};
        else if constexpr (std::is_same_v<T, ShiftedPowerRate>) return {{"family", "shifted_power"}, {"gamma", f.gamma}, {"c", f.c}, {"k", f.k}};
        else return {{"family", "log"}, {"c", f.c}};
      },
      r.family());
}

inline json to_json(const MarkModel& m) {
  json j = std::visit(
      [](const auto& l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DeterministicMark>) return {{"law", "deterministic"}, {"a0", l.a0}};
        else if constexpr (std::is_same_v<T, ExponentialHMark>) return {{"law", "exponential_h"}, {"rate", l.rate}};
        else return {{"law", "scaled"}, {"scale_law", to_json(l.scale_law)}};
      },
      m.mark_law);
  if (m.claim_law) j["claim_law"] = to_json(*m.claim_law);
  return j;
}

inline json to_json(const SimConfig& c) {
  json j = {{"rate", to_json(c.rate)},           {"kernel", to_json(c.kernel)}, {"horizon", c.horizon},
            {"seed", c.seed},                    {"max_events", c.max_events},  {"method", to_string(c.method)}};
  if (c.marks) j["marks"] = to_json(*c.marks);
  return j;
}

// ---------------------------------------------------------------------------
// Writer: keys sorted (nlohmann's default map), floats at 17 significant
// digits, non-finite floats as the strings "inf", "-inf", "nan".

inline void dump(std::ostream& out, const json& j, int indent = 2, int depth = 0) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << json(it.key()).dump() << ": ";
        dump(out, it.value(), indent, depth + 1);
      }
      out << '\n' << close << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        dump(out, j[i], indent, depth + 1);
      }
      out << '\n' << close << ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) out << format_double(x);
      else out << '"' << format_double(x) << '"';
      return;
    }
    default:
      out << j.dump();
  }
}

inline std::string dump_string(const json& j) {
  std::ostringstream s;
  dump(s, j);
  s << '\n';
  return s.str();
}

}  // namespace hawkes::json_io
