#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aht/runner.hpp"

using namespace aht;
using nlohmann::json;

namespace {

json report_of(const RunOutput& out) { return json::parse(out.report); }

int exit_of(const std::string& cfg, const std::string& command = "") {
  CliOverrides o;
  o.command = command;
  return execute(cfg, o).exit_code;
}

}  // namespace

TEST(RunnerConfig, RejectsMalformedConfigs) {
  EXPECT_EQ(exit_of("{not json"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"command":"inspect","geometry":{"type":"flat"}})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":2,"command":"inspect","geometry":{"type":"flat"}})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat"},"colour":1})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat","f":"x1"}})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat","n":"two"}})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"torus"}})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat"},"points":{"cnt":3}})J"),
            kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"launch","geometry":{"type":"flat"}})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"geometry":{"type":"flat"}})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat"}})J", "verify"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat"},"tol":-1})J"), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"conformal","f":"sin(x1"}})J"),
            kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat","n":2},
                        "points":{"list":[[0.1,0.2]]}})J"),
            kExitConfigError);
}

TEST(RunnerConfig, FlowBlockValidation) {
  const std::string tail = R"J(,"geometry":{"type":"random","n":2,"seed":7,"amplitude":0.3}})J";
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"flow","flow":{"m":2})J" + tail), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"flow","flow":{"tol_grad":0})J" + tail), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"flow","flow":{"steps":3})J" + tail), kExitConfigError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","flow":{"m":8})J" + tail), kExitConfigError);
}

TEST(RunnerConfig, GeometryErrors) {
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"s6","n":2}})J"), kExitGeometryError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"hopf","n":2},
                        "points":{"list":[[0.1,0.0,0.0,0.0]]}})J"),
            kExitGeometryError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"inspect","geometry":{"type":"conformal","n":2,"f":"x1"}})J"),
            kExitGeometryError);
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"flow","geometry":{"type":"conformal","n":2,"f":"sin(x1)"},
                        "flow":{"m":4}})J"),
            kExitGeometryError);
  const RunOutput out = execute(R"J({"schema":1,"command":"inspect","geometry":{"type":"s6","n":2}})J");
  EXPECT_EQ(report_of(out)["error"]["kind"], "geometry");
}

TEST(RunnerConfig, OverridesApply) {
  CliOverrides o;
  o.command = "inspect";
  o.tol = 1e-3;
  o.seed = 42;
  o.out = "/tmp/somewhere.json";
  const RunConfig cfg = parse_config(R"J({"schema":1,"geometry":{"type":"flat"},"points":{"seed":1},"tol":1e-9})J", o);
  EXPECT_EQ(cfg.command, "inspect");
  EXPECT_EQ(cfg.tol, 1e-3);
  EXPECT_EQ(cfg.point_seed, 42u);
  EXPECT_EQ(cfg.out, "/tmp/somewhere.json");
  EXPECT_EQ(cfg.geometry.jet_degree, 4);
}

TEST(RunnerInspect, SixSphereIsNearlyKahlerHarmonicMap) {
  const RunOutput out = execute(R"J({"schema":1,"command":"inspect","geometry":{"type":"s6"},
                                    "points":{"count":4,"seed":3}})J");
  EXPECT_EQ(out.exit_code, kExitPass);
  const json r = report_of(out);
  EXPECT_TRUE(r["pass"].get<bool>());
  EXPECT_EQ(r["sign_audit"], "paper-convention");
  EXPECT_EQ(r["summary"]["class"], "W1");
  EXPECT_TRUE(r["summary"]["verdicts"]["harmonic"].get<bool>());
  EXPECT_TRUE(r["summary"]["verdicts"]["harmonic_map"].get<bool>());
  ASSERT_EQ(r["points"].size(), 4u);
  for (const auto& p : r["points"]) EXPECT_EQ(p["class"], "W1");
}

TEST(RunnerInspect, SineConformalIsHarmonicNotHarmonicMap) {
  const RunOutput out = execute(R"J({"schema":1, "command":"inspect",
      "geometry":{"type":"conformal","n":2,"f":"sin(x1)","periodic":true,"jet_degree":4},
      "points":{"count":25,"seed":11}, "tol":1e-6})J");
  EXPECT_EQ(out.exit_code, kExitPass);
  const json r = report_of(out);
  EXPECT_TRUE(r["summary"]["verdicts"]["harmonic"].get<bool>());
  EXPECT_FALSE(r["summary"]["verdicts"]["harmonic_map"].get<bool>());
  EXPECT_EQ(r["summary"]["class"], "W4");
}

TEST(RunnerInspect, FlatReportIsAllZero) {
  const RunOutput out = execute(R"J({"schema":1,"command":"inspect","geometry":{"type":"flat","n":2}})J");
  EXPECT_EQ(out.exit_code, kExitPass);
  const json r = report_of(out);
  for (const auto& p : r["points"])
    for (const auto& [k, v] : p["residuals"].items()) EXPECT_EQ(v.get<double>(), 0.0) << k;
  EXPECT_EQ(r["summary"]["class"], "Kahler");
}

TEST(RunnerInspect, ReportsAreDeterministicWithSeventeenDigits) {
  const std::string cfg = R"J({"schema":1,"command":"inspect","geometry":{"type":"hopf","n":2},"points":{"count":3}})J";
  const std::string a = execute(cfg).report, b = execute(cfg).report;
  EXPECT_EQ(a, b);
  const json r = json::parse(a);
  const double scale = r["points"][0]["scale"].get<double>();
  std::ostringstream expect;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", scale);
  EXPECT_NE(a.find(std::string("\"scale\": ") + buf), std::string::npos);
  EXPECT_EQ(r["schema"], 1);
}

TEST(RunnerInspect, ExplicitPointsAreUsed) {
  const RunOutput out = execute(R"J({"schema":1,"command":"inspect","geometry":{"type":"hopf","n":2},
                                    "points":{"list":[[0.6,0.2,-0.3,0.4],[1.0,0.1,0.0,0.2]]}})J");
  const json r = report_of(out);
  ASSERT_EQ(r["points"].size(), 2u);
  EXPECT_EQ(r["points"][1]["x"][0].get<double>(), 1.0);
}

TEST(RunnerVerify, FlatPassesAndSixSphereFlagsPsiNorm) {
  EXPECT_EQ(exit_of(R"J({"schema":1,"command":"verify","geometry":{"type":"flat","n":3}})J"), kExitPass);
  const RunOutput s6 = execute(R"J({"schema":1,"command":"verify","geometry":{"type":"s6"},"points":{"count":3}})J");
  EXPECT_EQ(s6.exit_code, kExitResidualFailure);
  for (const auto& c : report_of(s6)["checks"]) {
    const bool should_pass = c["name"] != "nearly_kahler.psi_norm_144_alpha";
    EXPECT_EQ(c["pass"].get<bool>(), should_pass) << c["name"];
  }
}

TEST(RunnerClassify, HopfIsLocallyConformalKahler) {
  const RunOutput out = execute(R"J({"schema":1,"command":"classify","geometry":{"type":"hopf","n":3}})J");
  EXPECT_EQ(out.exit_code, kExitPass);
  EXPECT_EQ(report_of(out)["class"], "W4");
}

TEST(RunnerFlow, KahlerStartHasSingleTraceRow) {
  const RunOutput out = execute(R"J({"schema":1,"command":"flow",
      "geometry":{"type":"random","n":2,"seed":7,"amplitude":0.0},"flow":{"m":6}})J");
  EXPECT_EQ(out.exit_code, kExitPass);
  std::istringstream csv(out.trace_csv);
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 2);  // header + iteration 0
  const json grid = json::parse(out.grid_json);
  EXPECT_EQ(grid["nodes"].size(), 1296u);
  EXPECT_EQ(grid["nodes"][0].size(), 16u);
}

TEST(RunnerFlow, IterationBudgetExhaustionIsAStall) {
  const RunOutput out = execute(R"J({"schema":1,"command":"flow",
      "geometry":{"type":"random","n":2,"seed":7,"amplitude":0.3},"flow":{"m":6,"max_iter":3,"gradient_fields":2}})J");
  EXPECT_EQ(out.exit_code, kExitFlowStall);
  EXPECT_FALSE(report_of(out)["summary"]["converged"].get<bool>());
}

TEST(RunnerFlow, SeedSevenConvergesMonotonically) {
  const RunOutput out = execute(R"J({"schema":1,"command":"flow",
      "geometry":{"type":"random","n":2,"seed":7,"amplitude":0.3},"flow":{"m":16,"max_iter":5000,"tol_grad":1e-5}})J");
  EXPECT_EQ(out.exit_code, kExitPass);
  const json r = report_of(out);
  EXPECT_LT(r["summary"]["terminal_grad_norm"].get<double>(), 1e-5);
  EXPECT_TRUE(r["summary"]["monotone"].get<bool>());
  EXPECT_LT(r["summary"]["gradient_check"]["max_rel_error"].get<double>(), 1e-4);
  std::istringstream csv(out.trace_csv);
  std::string line;
  std::getline(csv, line);
  double previous = 1e300;
  while (std::getline(csv, line)) {
    const double e = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(e, previous);
    previous = e;
  }
}

TEST(RunnerOutput, WritesReportTraceAndGrid) {
  const RunOutput out = execute(R"J({"schema":1,"command":"flow",
      "geometry":{"type":"random","n":2,"seed":1,"amplitude":0.0},"flow":{"m":4}})J");
  const auto dir = std::filesystem::temp_directory_path() / "aht_runner_test";
  std::filesystem::create_directories(dir);
  const auto written = write_outputs(out, (dir / "run.json").string());
  ASSERT_EQ(written.size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir / "run.trace.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "run.grid.json"));
  std::ifstream f(dir / "run.json");
  std::stringstream text;
  text << f.rdbuf();
  EXPECT_EQ(text.str(), out.report);
  std::filesystem::remove_all(dir);
}
