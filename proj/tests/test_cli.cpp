#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hawkes/calibrate.hpp"
#include "hawkes/cli.hpp"
#include "hawkes/json_io.hpp"
#include "hawkes/simulate.hpp"

using namespace hawkes;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "hawkes");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Tmp {
 public:
  Tmp() {
    dir_ = fs::temp_directory_path() / ("hawkes_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  ~Tmp() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSim = R"({
  "rate": {"family": "linear", "nu": 1.0},
  "kernel": {"family": "exponential", "a": 1.0, "b": 2.0},
  "horizon": 500.0,
  "seed": 3
})";

}  // namespace

TEST(Cli, SimulateIsDeterministic) {
  Tmp tmp;
  const auto cfg = tmp.write("cfg.json", kSim);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", tmp.path("a.csv"), "--seed", "7"}).code, 0);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", tmp.path("b.csv"), "--seed", "7"}).code, 0);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", tmp.path("c.csv"), "--seed", "8"}).code, 0);
  EXPECT_EQ(slurp(tmp.path("a.csv")), slurp(tmp.path("b.csv")));
  EXPECT_NE(slurp(tmp.path("a.csv")), slurp(tmp.path("c.csv")));
  EXPECT_EQ(slurp(tmp.path("a.csv")).rfind("time\n", 0), 0u);
}

TEST(Cli, SimulateMatchesLibrary) {
  Tmp tmp;
  const auto cfg = tmp.write("cfg.json", kSim);
  const auto r = run({"simulate", "--config", cfg, "--seed", "7"});
  ASSERT_EQ(r.code, 0);
  SimConfig sc = json_io::parse_sim(json_io::Fields(json_io::read_file(cfg), "config"));
  sc.seed = 7;
  std::ostringstream expect;
  write_csv(expect, simulate(sc));
  EXPECT_EQ(r.out, expect.str());
}

TEST(Cli, MissingConfigExitsTwo) {
  const auto r = run({"simulate", "--config", "/nonexistent/cfg.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: config: ", 0), 0u);
}

TEST(Cli, UnknownKeyIsAnError) {
  Tmp tmp;
  std::string text = kSim;
  text.insert(text.rfind('}'), R"(, "horizn": 5)");
  const auto r = run({"simulate", "--config", tmp.write("cfg.json", text)});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("horizn"), std::string::npos);
}

TEST(Cli, MalformedJsonExitsTwo) {
  Tmp tmp;
  EXPECT_EQ(run({"simulate", "--config", tmp.write("cfg.json", "{\"rate\": ")}).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"simulate"}).code, 2);
}

TEST(Cli, DomainErrorExitsOneWithCode) {
  Tmp tmp;
  const auto cfg = tmp.write("cfg.json", R"({
    "experiment": "lln", "replicas": 4,
    "sim": {"rate": {"family": "linear", "nu": 1}, "kernel": {"family": "exponential", "a": 3, "b": 2}, "horizon": 5}
  })");
  const auto r = run({"mc", "--config", cfg});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: regime: ", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  const auto bad = tmp.write("bad.json", R"({"rate": {"family": "linear", "nu": -1},
    "kernel": {"family": "exponential", "a": 1, "b": 2}, "horizon": 5})");
  const auto r2 = run({"simulate", "--config", bad});
  EXPECT_EQ(r2.code, 1);
  EXPECT_EQ(r2.err.rfind("error: domain: ", 0), 0u);
}

TEST(Cli, LdpGammaCsv) {
  const auto r = run({"ldp", "gamma", "--mark-exp", "4", "--nu", "1", "--theta-max", "0.22", "--points", "23"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "theta,gamma");
  double last = -1;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    last = std::stod(line.substr(0, comma));
    EXPECT_TRUE(std::isfinite(std::stod(line.substr(comma + 1))));
    ++rows;
  }
  EXPECT_EQ(rows, 23);
  EXPECT_DOUBLE_EQ(last, 0.22);
  EXPECT_LT(last, std::log(25.0 / 16.0));
}

TEST(Cli, LdpGammaFlagsInfinity) {
  const auto r = run({"ldp", "gamma", "--mark-exp", "4", "--theta-min", "0.4", "--theta-max", "0.5", "--points", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0.5,inf\n"), std::string::npos);
  EXPECT_EQ(r.out.find("0.40000000000000002,inf"), std::string::npos);
}

TEST(Cli, LdpCriticalJson) {
  const auto r = run({"ldp", "critical", "--mark-exp", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("schema_version"), json_io::kSchemaVersion);
  EXPECT_NEAR(j.at("theta_c").get<double>(), std::log(25.0 / 16.0), 1e-10);
  EXPECT_EQ(j.at("config").at("mark_exp"), 4.0);
}

TEST(Cli, JsonKeysSortedAndFull) {
  Tmp tmp;
  const auto cfg = tmp.write("cfg.json", kSim);
  const auto r = run({"simulate", "--config", cfg, "--replicas", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("schema_version"), json_io::kSchemaVersion);
  // Defaults are resolved into the echoed config.
  EXPECT_EQ(j.at("config").at("method"), "auto");
  EXPECT_TRUE(j.at("config").contains("max_events"));
  std::vector<std::size_t> pos;
  for (const char* k : {"\"command\"", "\"config\"", "\"count_rate\"", "\"replicas\"", "\"schema_version\""})
    pos.push_back(r.out.find(k));
  EXPECT_TRUE(std::is_sorted(pos.begin(), pos.end()));
}

TEST(Cli, FloatsAtSeventeenDigits) {
  nlohmann::json j = {{"x", 0.1}, {"y", std::numeric_limits<double>::infinity()}, {"n", 3}};
  const auto s = json_io::dump_string(j);
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(s.find("\"inf\""), std::string::npos);
  EXPECT_NE(s.find("\"n\": 3"), std::string::npos);
}

TEST(Cli, RoundTripSimulateCalibrate) {
  Tmp tmp;
  std::string text = kSim;
  text.replace(text.find("500.0"), 5, "2000.0");
  const auto cfg = tmp.write("cfg.json", text);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", tmp.path("ev.csv")}).code, 0);
  const auto r = run({"calibrate", tmp.path("ev.csv"), "--horizon", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);

  const auto mem = calibrate::fit_exp(simulate(json_io::parse_sim(json_io::Fields(json_io::read_file(cfg), "config"))));
  EXPECT_EQ(j.at("params").at("nu").get<double>(), mem.params.nu);
  EXPECT_EQ(j.at("params").at("a").get<double>(), mem.params.a);
  EXPECT_EQ(j.at("params").at("b").get<double>(), mem.params.b);
  EXPECT_EQ(j.at("loglik").get<double>(), mem.loglik);
  EXPECT_EQ(j.at("n_events").get<std::size_t>(), mem.n_events);
  EXPECT_EQ(j.at("converged").get<bool>(), mem.converged);
}

TEST(Cli, CalibrateTooFewEvents) {
  Tmp tmp;
  const auto r = run({"calibrate", tmp.write("ev.csv", "time\n0.5\n1.5\n"), "--horizon", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: domain: ", 0), 0u);
}

TEST(Cli, RiskReport) {
  Tmp tmp;
  const auto cfg = tmp.write("risk.json", R"({"rho": 1.375, "nu": 1,
    "h_law": {"family": "exponential", "rate": 4}, "claim_law": {"family": "exponential", "rate": 2}})");
  const auto r = run({"risk", "--config", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("ruin_exponent").at("theta_dagger").get<double>(), 0.63352549619260, 1e-9);
  EXPECT_EQ(j.at("config").at("z"), "inf");
}

TEST(Cli, McCsvDump) {
  Tmp tmp;
  const auto cfg = tmp.write("mc.json", R"({"experiment": "lln", "replicas": 6, "seed": 2,
    "sim": {"rate": {"family": "linear", "nu": 1}, "kernel": {"family": "exponential", "a": 1, "b": 2}, "horizon": 50}})");
  const auto r = run({"mc", "--config", cfg, "--csv", tmp.path("rows.csv"), "--replicas", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("config").at("replicas"), 8);
  EXPECT_EQ(j.at("report").at("summary").at("n_replicas"), 8);
  const auto rows = slurp(tmp.path("rows.csv"));
  EXPECT_EQ(rows.rfind("replica,count_rate\n", 0), 0u);
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 9);
}

TEST(Cli, McIgnoresThreadCount) {
  Tmp tmp;
  const auto cfg = tmp.write("mc.json", R"({"experiment": "lln", "replicas": 16, "seed": 4,
    "sim": {"rate": {"family": "linear", "nu": 1}, "kernel": {"family": "exponential", "a": 1, "b": 2}, "horizon": 100}})");
  auto estimate = [&](const char* threads) {
    setenv("HAWKES_THREADS", threads, 1);
    const auto r = run({"mc", "--config", cfg});
    unsetenv("HAWKES_THREADS");
    return nlohmann::json::parse(r.out).at("report").at("summary").at("estimate").get<double>();
  };
  EXPECT_EQ(estimate("1"), estimate("3"));
}

TEST(Cli, Binary) {
  Tmp tmp;
  const auto cfg = tmp.write("cfg.json", kSim);
  const std::string bin = HAWKES_CLI_PATH;
  EXPECT_EQ(std::system((bin + " simulate --config " + cfg + " --out " + tmp.path("ev.csv")).c_str()), 0);
  EXPECT_TRUE(fs::exists(tmp.path("ev.csv")));
  const int status = std::system((bin + " simulate --config " + tmp.path("none.json") + " 2>/dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
