#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hawkes/error.hpp"

namespace hawkes {

// Strictly increasing event times in [0, horizon) with optional marks.
class EventStream {
 public:
  EventStream() = default;

  EventStream(double horizon, std::vector<double> times,
              std::optional<std::vector<double>> marks = std::nullopt, std::uint64_t seed = 0,
              bool truncated = false)
      : horizon_(horizon), times_(std::move(times)), marks_(std::move(marks)), seed_(seed),
        truncated_(truncated) {
    if (!(horizon_ >= 0.0) || !std::isfinite(horizon_)) throw DomainError("event stream horizon must be finite and >= 0");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double t = times_[i];
      if (!(t >= 0.0 && t < horizon_)) {
        throw DomainError("event time " + std::to_string(t) + " outside [0, horizon)");
      }
      if (i > 0 && !(t > times_[i - 1])) {
        throw DomainError("event times must be strictly increasing (index " + std::to_string(i) + ")");
      }
    }
    if (marks_ && marks_->size() != times_.size()) {
      throw DomainError("marks must have the same length as times");
    }
  }

  double horizon() const { return horizon_; }
  const std::vector<double>& times() const { return times_; }
  const std::optional<std::vector<double>>& marks() const { return marks_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  // Set when the simulator stopped at its event cap before the horizon.
  bool truncated() const { return truncated_; }

  // N(a, b]
  std::size_t count_in(double a, double b) const;

 private:
  double horizon_ = 0.0;
  std::vector<double> times_;
  std::optional<std::vector<double>> marks_;
  std::uint64_t seed_ = 0;
  bool truncated_ = false;
};

inline std::size_t EventStream::count_in(double a, double b) const {
  std::size_t n = 0;
  for (double t : times_) n += (t > a && t <= b);
  return n;
}

// "%.17g" formatting shared by every CSV/JSON writer.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// CSV with header `time,mark` (mark column omitted when absent).
inline void write_csv(std::ostream& out, const EventStream& s) {
  const bool marked = s.marks().has_value();
  out << (marked ? "time,mark\n" : "time\n");
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_double(s.times()[i]);
    if (marked) out << ',' << format_double((*s.marks())[i]);
    out << '\n';
  }
}

inline EventStream read_csv(std::istream& in, double horizon, std::uint64_t seed = 0) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("event CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool marked;
  if (line == "time,mark") marked = true;
  else if (line == "time") marked = false;
  else throw ConfigError("event CSV header must be `time` or `time,mark`, got `" + line + "`");
  std::vector<double> times, marks;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    try {
      std::getline(row, cell, ',');
      times.push_back(std::stod(cell));
      if (marked) {
        if (!std::getline(row, cell, ',')) throw ConfigError("missing mark");
        marks.push_back(std::stod(cell));
      }
    } catch (const std::logic_error&) {
      throw ConfigError("event CSV: unparsable row " + std::to_string(lineno));
    }
  }
  if (marked) return EventStream(horizon, std::move(times), std::move(marks), seed);
  return EventStream(horizon, std::move(times), std::nullopt, seed);
}

}  // namespace hawkes
