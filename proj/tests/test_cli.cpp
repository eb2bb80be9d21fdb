#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "bethekit/cli.hpp"

using namespace bethekit;
using nlohmann::json;

namespace {

json six_vertex_config() {
  return json::parse(R"({
    "family": "xxz", "two_ell": [1, 1], "z": [[1, 0], [1, 0]], "mu": [0, 0],
    "gamma": [0.6180339887498949, 0], "k": 1,
    "tasks": ["solve", "classify", "identities", "sumrules", "count"], "sumrule_ms": [0]
  })");
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsApplied) {
  const auto rc = parse_config(six_vertex_config());
  ASSERT_EQ(rc.instances.size(), 1u);
  const auto& c = rc.instances[0];
  EXPECT_EQ(c.identity_shifts, (std::vector<int>{-2, -1, 0, 1, 2}));
  EXPECT_EQ(c.solver.rng_seed, 42u);
  EXPECT_EQ(c.solver.newton_tol, 1e-11);
}

TEST(Config, RoundTripsThroughEcho) {
  auto j = six_vertex_config();
  j["seed"] = 9;
  j["solver"] = {{"max_starts", 50}, {"expected_count", 2}};
  const auto rc = parse_config(j);
  EXPECT_EQ(to_json(parse_config(to_json(rc))).dump(), to_json(rc).dump());
}

TEST(Config, Diagnostics) {
  auto j = six_vertex_config();
  j.erase("k");
  EXPECT_NE(config_error(j).find("k: missing"), std::string::npos);

  j = six_vertex_config();
  j["z"][1] = 1.0;
  EXPECT_NE(config_error(j).find("z[1]"), std::string::npos);

  j = six_vertex_config();
  j["z"].push_back({1, 0});
  EXPECT_NE(config_error(j).find("z:"), std::string::npos);

  j = six_vertex_config();
  j["colour"] = "red";
  EXPECT_NE(config_error(j).find("colour: unknown key"), std::string::npos);

  j = six_vertex_config();
  j["tasks"] = {"identities"};
  EXPECT_NE(config_error(j).find("requires task \"solve\""), std::string::npos);

  j = six_vertex_config();
  j["tasks"] = json::array();
  EXPECT_NE(config_error(j).find("tasks"), std::string::npos);

  j = six_vertex_config();
  j["family"] = "xxx";
  EXPECT_NE(config_error(j).find("gamma: only valid"), std::string::npos);

  j = six_vertex_config();
  j["z"][0] = {0, 0};
  EXPECT_FALSE(config_error(j).empty());

  j = six_vertex_config();
  j["two_ell"][0] = 0;
  EXPECT_NE(config_error(j).find("two_ell[0]"), std::string::npos);

  j = six_vertex_config();
  j["solver"] = {{"newton_tol", 1e-6}, {"dedup_tol", 1e-8}};
  EXPECT_NE(config_error(j).find("solver"), std::string::npos);

  const json batch = {{"instances", json::array({six_vertex_config(), json::object()})}};
  EXPECT_NE(config_error(batch).find("instances[1].family"), std::string::npos);
}

TEST(Config, MalformedJsonReportsPosition) {
  try {
    parse_config_text("{\n  \"family\": \"xxx\",\n  \"k\" 1\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Run, SixVertexReport) {
  const auto result = run(parse_config(six_vertex_config()));
  EXPECT_TRUE(result.pass);
  const auto& inst = result.report["instances"][0];
  ASSERT_EQ(inst["solutions"].size(), 2u);
  for (const auto& s : inst["solutions"]) {
    for (const auto& id : s["identities"]) EXPECT_LE(id["normalized"].get<double>(), 1e-8);
    ASSERT_EQ(s["sumrules"].size(), 1u);
    EXPECT_TRUE(s["sumrules"][0]["applicable"].get<bool>());
    const auto d = s["sumrules"][0]["defect"];
    EXPECT_LE(std::hypot(d[0].get<double>(), d[1].get<double>()), 1e-10);
  }
  EXPECT_TRUE(inst["count"]["match"].get<bool>());
  EXPECT_EQ(result.report["header"]["tool"], "bethekit");
  EXPECT_EQ(result.report["header"]["tolerances"]["identity"], 1e-8);
}

TEST(Run, EmptySector) {
  auto j = six_vertex_config();
  j["k"] = 0;
  j["sumrule_ms"] = {1};
  const auto result = run(parse_config(j));
  EXPECT_TRUE(result.pass);
  const auto& sols = result.report["instances"][0]["solutions"];
  ASSERT_EQ(sols.size(), 1u);
  EXPECT_TRUE(sols[0]["roots"].empty());
  for (const auto& id : sols[0]["identities"]) {
    EXPECT_EQ(id["value"][0].get<double>(), 0.0);
    EXPECT_EQ(id["value"][1].get<double>(), 0.0);
  }
}

TEST(Run, NotApplicableSumRuleIsNotAFailure) {
  auto j = six_vertex_config();
  j["sumrule_ms"] = {0, 1};
  const auto result = run(parse_config(j));
  EXPECT_TRUE(result.pass);
  EXPECT_FALSE(result.report["instances"][0]["solutions"][0]["sumrules"][1]["applicable"].get<bool>());
}

TEST(Run, ThresholdViolationFails) {
  RunOptions opt;
  opt.thresholds.identity = 1e-300;
  const auto result = run(parse_config(six_vertex_config()), opt);
  EXPECT_FALSE(result.pass);
  EXPECT_FALSE(result.report["summary"]["failures"].empty());
  EXPECT_NE(result.report["summary"]["failures"][0].get<std::string>().find("instance 0: solution"), std::string::npos);
}

TEST(Run, TaskOverrideAndCountWithoutSolve) {
  RunOptions opt;
  opt.tasks = std::vector<Task>{Task::count};
  const auto result = run(parse_config(six_vertex_config()), opt);
  const auto& inst = result.report["instances"][0];
  EXPECT_FALSE(inst.contains("solutions"));
  EXPECT_EQ(inst["count"]["expected"], 2);
}

TEST(Run, ReportsIndependentOfThreadCount) {
  auto a = six_vertex_config();
  auto b = six_vertex_config();
  b["family"] = "xxx";
  b.erase("gamma");
  b["z"] = {{0.3, 0.1}, {-0.5, 0.2}};
  b["mu"] = {0.4, 0.3};
  b["k"] = 2;
  b["tasks"] = {"solve", "classify", "identities", "count"};
  auto c = a;
  c["k"] = 2;
  c["sumrule_ms"] = {-1};
  const auto rc = parse_config(json{{"instances", {a, b, c}}});
  RunOptions serial, parallel;
  parallel.threads = 3;
  EXPECT_EQ(run(rc, serial).report.dump(), run(rc, parallel).report.dump());
  EXPECT_EQ(run(rc, serial).report.dump(), run(rc, serial).report.dump());
}

TEST(PresetFm, TwoSites) {
  const auto rc = preset_fm(2);
  ASSERT_EQ(rc.instances.size(), 2u);
  EXPECT_EQ(rc.instances[1].sumrule_ms, (std::vector<int>{0}));
  const auto result = run(rc);
  EXPECT_TRUE(result.pass);
  const auto& sols = result.report["instances"][1]["solutions"];
  ASSERT_EQ(sols.size(), 2u);
  EXPECT_NEAR(sols[0]["roots"][0][0].get<double>(), -1.0, 1e-12);
  EXPECT_NEAR(sols[1]["roots"][0][0].get<double>(), 1.0, 1e-12);
  for (const auto& s : sols) {
    const auto d = s["sumrules"][0]["defect"];
    EXPECT_LE(std::hypot(d[0].get<double>(), d[1].get<double>()), 1e-12);
  }
}

TEST(PresetFm, OddLengthRejected) {
  EXPECT_THROW(preset_fm(1), InvalidInput);
  EXPECT_THROW(preset_fm(3), InvalidInput);
}

TEST(PresetFm, FourSitesComparesAgainstWeightDimension) {
  const auto rc = preset_fm(4);
  const auto result = run(rc);
  const auto& count = result.report["instances"][2]["count"];
  EXPECT_EQ(count["expected"], 6);
  EXPECT_TRUE(count["conjectural"].get<bool>());
  EXPECT_TRUE(result.pass);
}

TEST(SampleConfigs, ParseAndPass) {
  for (const char* name : {"six_vertex_n2.json", "xxx_generic.json", "xxz_twisted.json", "batch.json"}) {
    std::ifstream in(std::string(BETHEKIT_CONFIG_DIR) + "/" + name);
    ASSERT_TRUE(in) << name;
    std::stringstream buf;
    buf << in.rdbuf();
    const auto result = run(parse_config_text(buf.str()));
    EXPECT_TRUE(result.pass) << name << ": " << result.report["summary"].dump();
  }
}
