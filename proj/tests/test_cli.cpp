#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "regulib/cli.hpp"

namespace fs = std::filesystem;
using regulib::Json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "regulib");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = regulib::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const fs::path p = fs::path(REGULIB_TEST_TMP) / ("cli_" + name);
  fs::remove_all(p);
  return p.string();
}

Json read_json(const fs::path& p) {
  std::ifstream f(p);
  return Json::parse(f);
}

}  // namespace

TEST(Cli, RunWritesTrajectoryAndSummary) {
  const std::string dir = scratch("run");
  const Outcome o = call({"run", "--scenario", "harmonic1", "--set", "T=2.5", "--set", "h=0.01",
                          "--analyses", "mato,sigma", "--out", dir});
  ASSERT_EQ(o.code, 0) << o.err;
  std::ifstream csv(fs::path(dir) / "trajectory.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "t,rho_1,w_1,w_2,z_1,e_1,xi_1,xi_2,theta_hat_1,X_1_1");
  std::size_t rows = 0;
  std::string last;
  while (std::getline(csv, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, static_cast<std::size_t>(std::ceil(2.5 / 0.01)) + 1);
  EXPECT_EQ(std::stod(last.substr(0, last.find(','))), 2.5);

  const Json s = read_json(fs::path(dir) / "summary.json");
  EXPECT_EQ(s.at("tool"), "regulib");
  EXPECT_EQ(s.at("parameters").at("T"), 2.5);
  EXPECT_EQ(s.at("derived").at("K"), Json::array({7.0, 10.0}));
  EXPECT_TRUE(s.at("metrics").contains("terminal_e"));
  EXPECT_TRUE(s.at("analyses").at("mato").at("pass").get<bool>());
  EXPECT_FALSE(s.at("analyses").contains("pe"));
}

TEST(Cli, EmptyAnalysesGiveMetricsOnly) {
  const std::string dir = scratch("metrics_only");
  const Outcome o = call({"run", "--set", "T=1", "--analyses", "", "--out", dir});
  ASSERT_EQ(o.code, 0) << o.err;
  const Json s = read_json(fs::path(dir) / "summary.json");
  EXPECT_FALSE(s.contains("analyses"));
  EXPECT_TRUE(s.contains("metrics"));
}

TEST(Cli, UnstabilizedLoopIsFlagged) {
  const std::string dir = scratch("k0");
  const Outcome o = call({"run", "--scenario", "harmonic1", "--set", "k=0.0", "--analyses", "", "--out", dir});
  EXPECT_TRUE(o.code == 0 || o.code == 3) << o.err;
  const Json m = read_json(fs::path(dir) / "summary.json").at("metrics");
  EXPECT_TRUE(m.at("diverged").get<bool>() || !m.at("regulated").get<bool>());
}

TEST(Cli, ConfigFileAndOverridesCombine) {
  const std::string dir = scratch("config");
  fs::create_directories(dir);
  const std::string cfg = dir + "/run.json";
  std::ofstream(cfg) << R"({"scenario": "harmonic1", "set": {"T": 1, "k": 3}, "analyses": []})";
  const Outcome o = call({"run", "--config", cfg, "--set", "k=4", "--out", dir});
  ASSERT_EQ(o.code, 0) << o.err;
  const Json s = read_json(fs::path(dir) / "summary.json");
  EXPECT_EQ(s.at("parameters").at("k"), 4.0);
  EXPECT_EQ(s.at("parameters").at("T"), 1.0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const std::string dir = scratch("errors");
  EXPECT_EQ(call({"run", "--scenario", "nope", "--out", dir}).code, 2);
  EXPECT_EQ(call({"run", "--set", "bogus=1", "--out", dir}).code, 2);
  EXPECT_EQ(call({"run", "--set", "T=1", "--analyses", "magic", "--out", dir}).code, 2);
  EXPECT_EQ(call({"run", "--config", dir + "/missing.json"}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"verify", "--set", "b=[1,-2]", "--out", dir}).code, 2);
}

TEST(Cli, ProbeLadderIsMonotone) {
  const std::string dir = scratch("probe");
  const Outcome o = call({"probe", "--scenario", "harmonic1", "--set", "T=20", "--gain", "k",
                          "--floor", "0.25", "--max-doublings", "6", "--out", dir});
  ASSERT_EQ(o.code, 0) << o.err;
  const Json p = read_json(fs::path(dir) / "probe.json").at("probe");
  const Json& ladder = p.at("ladder");
  ASSERT_FALSE(ladder.empty());
  for (std::size_t i = 1; i < ladder.size(); ++i)
    EXPECT_EQ(ladder[i].at("gain").get<double>(), 2.0 * ladder[i - 1].at("gain").get<double>());
  EXPECT_EQ(ladder[0].at("gain"), 0.25);
  EXPECT_EQ(p.at("passing_gain"), ladder.back().at("gain"));
  EXPECT_TRUE(ladder.back().at("passed").get<bool>());
}

TEST(Cli, WrongSignProbeExhausts) {
  const std::string dir = scratch("wrong_sign");
  const Outcome o = call({"probe", "--scenario", "harmonic1-wrong-sign", "--set", "T=20",
                          "--max-doublings", "1", "--out", dir});
  EXPECT_EQ(o.code, 4);
  EXPECT_NE(o.err.find("no passing k"), std::string::npos);
  const Json p = read_json(fs::path(dir) / "probe.json").at("probe");
  EXPECT_EQ(p.at("ladder").size(), 2u);
  EXPECT_TRUE(p.at("passing_gain").is_null());
}

TEST(Cli, VerifyExitCodes) {
  const std::string good = scratch("verify_good");
  EXPECT_EQ(call({"verify", "--scenario", "harmonic1", "--out", good}).code, 0);
  const Json v = read_json(fs::path(good) / "verify.json");
  EXPECT_TRUE(v.at("failed").empty());
  EXPECT_EQ(v.at("checks").size(), 4u);

  const std::string bad = scratch("verify_nope");
  const Outcome o = call({"verify", "--scenario", "no-pe", "--out", bad});
  EXPECT_EQ(o.code, 5);
  EXPECT_EQ(read_json(fs::path(bad) / "verify.json").at("failed"), Json::array({"pe"}));
}
