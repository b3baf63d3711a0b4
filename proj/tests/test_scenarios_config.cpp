#include <gtest/gtest.h>

#include <fstream>

#include "regulib/analysis.hpp"
#include "regulib/config.hpp"
#include "regulib/scenarios.hpp"
#include "support.hpp"

using namespace regulib;
using regulib::testing::vec;

TEST(Registry, AllScenariosValidate) {
  const std::vector<std::string> names = scenario_names();
  EXPECT_EQ(names, (std::vector<std::string>{"harmonic1", "harmonic1-r2", "no-pe", "harmonic1-wrong-sign"}));
  for (const NamedScenario& ns : scenario_registry()) {
    const Scenario s = ns.build();
    EXPECT_EQ(s.name, ns.name);
    EXPECT_FALSE(ns.description.empty());
    EXPECT_NO_THROW(validate(s)) << ns.name;
  }
  EXPECT_THROW(build_scenario("nope"), ConfigError);
}

TEST(Registry, ImmersionHoldsOnTheAttractor) {
  for (const std::string& name : {"harmonic1", "no-pe"}) {
    const Scenario s = build_scenario(name);
    for (double rho : {0.8, 1.0, 1.2}) {
      const AugmentedPoint pt{vec({rho}), vec({0.3, -0.7}), vec({0.0})};
      const ImmersionResidual r = immersion_residual(s.immersion, s.plant, s.exo, pt);
      EXPECT_LE(r.ode.cwiseAbs().maxCoeff(), 1e-6) << name;
      EXPECT_LE(std::abs(r.out), 1e-12) << name;
    }
  }
}

TEST(Registry, WrongSignDiffersOnlyInSign) {
  const Scenario a = build_scenario("harmonic1");
  const Scenario b = build_scenario("harmonic1-wrong-sign");
  EXPECT_EQ(a.feedback_sign, 1.0);
  EXPECT_EQ(b.feedback_sign, -1.0);
  EXPECT_EQ(parameter_echo(a).at("k"), parameter_echo(b).at("k"));
}

TEST(Echo, RoundTripsBitForBit) {
  for (const std::string& name : scenario_names()) {
    Json over = {{"k", 0.1 + 0.2}, {"T", 7.25}};
    if (name == "harmonic1-r2") over["g"] = 3.3;
    const Scenario s = apply_overrides(build_scenario(name), over);
    const Json echo = parameter_echo(s);
    const Scenario back = scenario_from_parameters(Json::parse(echo.dump()));
    EXPECT_EQ(parameter_echo(back), echo) << name;
    EXPECT_EQ(back.regulator.F, s.regulator.F);
    EXPECT_EQ(back.regulator.K, s.regulator.K);
  }
  EXPECT_THROW(scenario_from_parameters(Json{{"k", 1.0}}), ConfigError);
}

TEST(Overrides, ApplyAndResynthesize) {
  const Scenario s = apply_overrides(build_scenario("harmonic1"),
                                     Json{{"lambda", 2.0}, {"b", {1.0, 3.0}}, {"rho", 0.9}, {"X0", 0.5}});
  EXPECT_EQ(s.regulator.lambda, 2.0);
  EXPECT_EQ(s.regulator.F(0, 0), -3.0);
  EXPECT_EQ(s.init.rho, vec({0.9}));
  EXPECT_EQ(s.init.X(0, 0), 0.5);
  const Scenario r2 = apply_overrides(build_scenario("harmonic1-r2"), Json{{"reduction_roots", {-3.0}}});
  EXPECT_EQ(r2.reduction->a, std::vector<double>{3.0});
}

TEST(Overrides, Errors) {
  const Scenario s = build_scenario("harmonic1");
  EXPECT_THROW(apply_overrides(s, Json{{"kk", 1.0}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, Json{{"k", "fast"}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, Json{{"g", 4.0}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, Json{{"seed", -1}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, Json{{"X0", {{1.0}, {1.0, 2.0}}}}), ConfigError);
  EXPECT_THROW(apply_overrides(s, Json{{"b", {1.0, -2.0}}}), SynthesisError);
  EXPECT_THROW(apply_overrides(s, Json{{"lambda", 0.0}}), ArgumentError);
  EXPECT_THROW(apply_overrides(s, Json::array()), ConfigError);
}

TEST(Assignment, ParsesJsonOrString) {
  EXPECT_EQ(parse_assignment("k=2.5").second, Json(2.5));
  EXPECT_EQ(parse_assignment("rho=[1.1]").second, Json::array({1.1}));
  EXPECT_EQ(parse_assignment("name=abc"), std::make_pair(std::string("name"), Json("abc")));
  EXPECT_EQ(parse_assignment("a=b=c").second, Json("b=c"));
  EXPECT_THROW(parse_assignment("novalue"), ConfigError);
  EXPECT_THROW(parse_assignment("=3"), ConfigError);
}

TEST(Config, ParsesDocument) {
  const RunConfig c = parse_config(Json::parse(R"({
    "scenario": "no-pe", "set": {"k": 5}, "out": "res",
    "analyses": ["pe"], "probe": {"gain": "lambda", "max_doublings": 3, "floor": 0.5}})"));
  EXPECT_EQ(c.scenario, "no-pe");
  EXPECT_EQ(c.overrides, Json({{"k", 5}}));
  EXPECT_EQ(c.out, "res");
  EXPECT_EQ(*c.analyses, std::vector<std::string>{"pe"});
  EXPECT_EQ(c.probe.gain, "lambda");
  EXPECT_EQ(c.probe.max_doublings, 3u);
  EXPECT_EQ(*c.probe.floor, 0.5);
  EXPECT_EQ(scenario_from_config(c).regulator.k, 5.0);

  const RunConfig d = parse_config(Json::object());
  EXPECT_EQ(d.scenario, "harmonic1");
  EXPECT_FALSE(d.analyses.has_value());
  EXPECT_EQ(d.probe.max_doublings, 11u);

  EXPECT_THROW(parse_config(Json{{"extra", 1}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"probe", {{"bogus", 1}}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"scenario", 3}}), ConfigError);
}

TEST(Config, LoadsFile) {
  const std::string path = std::string(REGULIB_TEST_TMP) + "/cfg_test.json";
  {
    std::ofstream(path) << R"({"scenario": "harmonic1", "set": {"T": 4}})";
  }
  EXPECT_EQ(load_config(path).overrides.at("T"), 4);
  {
    std::ofstream(path) << "{not json";
  }
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_THROW(load_config(path + ".missing"), ConfigError);
}
