#include "qqsp/scenario.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <fstream>
#include <sstream>

using namespace qqsp;
using namespace qqsp::cli;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qqsp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QQSP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json minimal() {
  return Json::parse(R"({
    "name": "tiny",
    "algebra": {"kind": "full", "dim": 2},
    "seed": {"builtin": "mixed"},
    "initial_state": [[0.5, 0], [0, 0.5]],
    "process_type": "A",
    "horizon": 3,
    "ensemble": {"random": 2},
    "pipeline": ["validate", "propagate", "kc", "ergodic"]
  })");
}

const StageResult& stage(const Report& r, const std::string& name) {
  for (const auto& s : r.stages)
    if (s.stage == name) return s;
  throw std::out_of_range(name);
}

}  // namespace

TEST(ParseScenario, AcceptsMinimalDocument) {
  const Scenario sc = parse_scenario(minimal());
  EXPECT_EQ(sc.name, "tiny");
  EXPECT_EQ(sc.dim, 2);
  EXPECT_EQ(sc.pipeline.size(), 4U);
  EXPECT_EQ(sc.initial_state(0, 0), std::complex<double>(0.5, 0.0));
}

TEST(ParseScenario, MissingInitialStateIsRejected) {
  Json doc = minimal();
  doc.erase("initial_state");
  try {
    parse_scenario(doc);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("initial_state"), std::string::npos);
  }
}

TEST(ParseScenario, RejectsInconsistentDimensions) {
  Json doc = minimal();
  doc["initial_state"] = Json::parse("[[1,0,0],[0,0,0],[0,0,0]]");
  EXPECT_THROW(parse_scenario(doc), ScenarioError);
  doc = minimal();
  doc["seed"] = Json{{"builtin", "volterra"}, {"a", 1.0}};
  EXPECT_THROW(parse_scenario(doc), ScenarioError);
  doc = minimal();
  doc["seed"] = Json{{"step_maps", Json::array({Json::parse("[[1]]")})}};
  EXPECT_THROW(parse_scenario(doc), ScenarioError);
}

TEST(ParseScenario, CompositionStagesNeedHorizonTwo) {
  Json doc = minimal();
  doc["horizon"] = 1;
  EXPECT_THROW(parse_scenario(doc), ScenarioError);
  doc["pipeline"] = Json::array({"validate", "propagate"});
  EXPECT_NO_THROW(parse_scenario(doc));
}

TEST(ParseScenario, RejectsMalformedJsonAndUnknownStages) {
  EXPECT_THROW(parse_scenario_text("{ not json"), ScenarioError);
  Json doc = minimal();
  doc["pipeline"] = Json::array({"validate", "dance"});
  EXPECT_THROW(parse_scenario(doc), ScenarioError);
}

TEST(ParseScenario, ReadsExplicitStepMapsAndClassicalTensors) {
  Json doc = minimal();
  doc["algebra"] = Json{{"kind", "diagonal"}, {"dim", 2}};
  doc["initial_state"] = Json{{"distribution", {0.5, 0.5}}};
  doc["seed"] = Json{{"classical", {{"tensors", Json::array({Json::array({1, 0, 1, 0, 1, 0, 0, 1})})}}}};
  const Scenario sc = parse_scenario(doc);
  const RunResult r = run_scenario(sc);
  EXPECT_FALSE(r.report.failure.has_value());
  EXPECT_NEAR(r.report.omega_diagonals.at(1).at(0), 0.75, 1e-12);

  Json maps = minimal();
  Json m = Json::array();
  for (int i = 0; i < 16; ++i) {
    Json row = Json::array();
    for (int j = 0; j < 4; ++j) row.push_back((j == 0 || j == 3) && (i == 0 || i == 15 || i == 5 || i == 10) ? 0.5 : 0.0);
    m.push_back(row);
  }
  maps["seed"] = Json{{"step_maps", Json::array({m})}};
  EXPECT_NO_THROW(parse_scenario(maps));
}

TEST(RunScenario, ConstantBuiltinIsExactAndErgodic) {
  const RunResult r = run_scenario(parse_scenario(builtin_scenario("constant-n2")));
  ASSERT_FALSE(r.report.failure.has_value());
  EXPECT_LE(stage(r.report, "kc").data["max"].get<double>(), 1e-12);
  EXPECT_LE(stage(r.report, "marginals").data["slice_identities"]["max"].get<double>(), 1e-12);
  EXPECT_LE(stage(r.report, "axioms").data["max"].get<double>(), 1e-12);
  EXPECT_LE(stage(r.report, "reconstruct").data["max_map_deviation"].get<double>(), 1e-12);
  EXPECT_TRUE(r.report.verdicts["ergodic_at_horizon"].get<bool>());
  for (const auto& series : r.report.decay)
    for (const auto& row : series.rows) EXPECT_LE(row.distance, 1e-12);
}

TEST(RunScenario, VolterraOmegaTrajectoryPrefix) {
  const RunResult r = run_scenario(parse_scenario(builtin_scenario("volterra-a1-typeA")));
  const std::string csv = omega_csv(r.report.omega_diagonals);
  std::istringstream in(csv);
  std::string header, r0, r1, r2;
  std::getline(in, header);
  std::getline(in, r0);
  std::getline(in, r1);
  std::getline(in, r2);
  EXPECT_EQ(header, "t,diag_0,diag_1");
  EXPECT_EQ(r0, "0,0.5,0.5");
  EXPECT_EQ(r1, "1,0.75,0.25");
  EXPECT_EQ(r2, "2,0.9375,0.0625");
}

TEST(RunScenario, StrictModeStopsOnInvalidSeed) {
  Json doc = minimal();
  doc["seed"] = Json{{"builtin", "transpose-embedding"}};
  const Scenario sc = parse_scenario(doc);
  const RunResult strict = run_scenario(sc, {Mode::strict, std::nullopt});
  ASSERT_TRUE(strict.report.failure.has_value());
  EXPECT_EQ(strict.report.stages.size(), 1U);
  const RunResult permissive = run_scenario(sc, {Mode::permissive, std::nullopt});
  EXPECT_FALSE(permissive.report.failure.has_value());
  EXPECT_EQ(permissive.report.stages.size(), 4U);
  EXPECT_FALSE(permissive.report.stages.front().ok);
}

TEST(RunScenario, SeedOverrideIsRecorded) {
  const Scenario sc = parse_scenario(minimal());
  EXPECT_EQ(run_scenario(sc).report.seed, kDefaultSeed);
  EXPECT_EQ(run_scenario(sc, {Mode::strict, 99}).report.seed, 99U);
}

TEST(Report, StructuredFormRoundTrips) {
  const Report report = run_scenario(parse_scenario(builtin_scenario("constant-n2"))).report;
  const Report back = report_from_json(Json::parse(to_json(report).dump(2)));
  EXPECT_EQ(back, report);
}

TEST(Report, DecayCsvHasOneRowPerPairAndTime) {
  Json doc = minimal();
  doc["ensemble"] = Json{{"random", 2}};
  const Report report = run_scenario(parse_scenario(doc)).report;
  ASSERT_FALSE(report.decay.empty());
  for (const auto& series : report.decay) {
    const std::string csv = decay_csv(series);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,pair_index,distance");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3);
  }
}

TEST(Report, EmitWritesBundleFiles) {
  const fs::path dir = scratch_dir("bundle");
  const Report report = run_scenario(parse_scenario(minimal())).report;
  const auto files = emit_report(report, Format::csv_bundle, dir);
  EXPECT_EQ(files.size(), 1U + 1U + 4U);
  EXPECT_TRUE(fs::exists(dir / "tiny.report.json"));
  EXPECT_TRUE(fs::exists(dir / "tiny.omega.csv"));
  EXPECT_TRUE(fs::exists(dir / "tiny.decay_Q.csv"));
}

TEST(Report, RerunIsByteIdentical) {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  const Scenario sc = parse_scenario(builtin_scenario("entangling-n2-typeB"));
  emit_report(run_scenario(sc).report, Format::structured, a);
  emit_report(run_scenario(sc).report, Format::structured, b);
  EXPECT_EQ(slurp(a / "entangling-n2-typeB.report.json"), slurp(b / "entangling-n2-typeB.report.json"));
}

TEST(ScenarioFiles, ShippedExampleRunsCleanly) {
  const Scenario sc = parse_scenario_file(fs::path(QQSP_SCENARIO_DIR) / "tracial-step-map.json");
  const RunResult r = run_scenario(sc);
  EXPECT_FALSE(r.report.failure.has_value());
  EXPECT_EQ(r.report.seed, 7U);
  for (const auto& s : r.report.stages) EXPECT_TRUE(s.ok) << s.stage;
}

TEST(Builtins, AllParseAndUnknownIsRejected) {
  for (const auto& name : builtin_names()) EXPECT_NO_THROW(parse_scenario(builtin_scenario(name))) << name;
  EXPECT_THROW(builtin_scenario("nope"), ScenarioError);
}

TEST(Cli, ExitCodesFollowContract) {
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("list-builtins"), 0);
  EXPECT_EQ(run_cli("describe constant-n2"), 0);
  EXPECT_EQ(run_cli("run constant-n2 --out-dir " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "constant-n2.report.json"));

  Json missing = minimal();
  missing.erase("initial_state");
  const fs::path bad = dir / "missing.json";
  std::ofstream(bad) << missing.dump();
  const fs::path empty_out = dir / "missing_out";
  EXPECT_EQ(run_cli("run " + bad.string() + " --out-dir " + empty_out.string()), 2);
  EXPECT_FALSE(fs::exists(empty_out));

  Json transpose = minimal();
  transpose["seed"] = Json{{"builtin", "transpose-embedding"}};
  const fs::path tfile = dir / "transpose.json";
  std::ofstream(tfile) << transpose.dump();
  EXPECT_EQ(run_cli("run " + tfile.string() + " --strict --out-dir " + dir.string()), 3);
  EXPECT_EQ(run_cli("run " + tfile.string() + " --permissive --out-dir " + dir.string()), 0);

  const fs::path blocker = dir / "not_a_dir";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(run_cli("run constant-n2 --out-dir " + (blocker / "sub").string()), 4);

  EXPECT_EQ(run_cli("run constant-n2 --format yaml"), 2);
  EXPECT_EQ(run_cli("run no-such-scenario"), 4);
}

TEST(Cli, CsvBundleWritesSeriesFiles) {
  const fs::path dir = scratch_dir("cli_csv");
  EXPECT_EQ(run_cli("run volterra-a1-typeA --format csv-bundle --seed 7 --out-dir " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "volterra-a1-typeA.omega.csv"));
  EXPECT_TRUE(fs::exists(dir / "volterra-a1-typeA.decay_P.csv"));
  const Json report = Json::parse(slurp(dir / "volterra-a1-typeA.report.json"));
  EXPECT_EQ(report["seed"].get<std::uint64_t>(), 7U);
}
