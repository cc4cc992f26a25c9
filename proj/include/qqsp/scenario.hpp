// Scenario files, pipeline execution and report emission for the qqsp CLI.
//
// Scenarios and reports are JSON documents. Complex numbers are [re, im]
// pairs; matrices are dense row-major lists of rows.

#pragma once

#include "qqsp/classical.hpp"
#include "qqsp/ergodic.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qqsp::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "qqsp 0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 20240531;

/// Exit-status contract of the CLI.
enum ExitCode : int { kOk = 0, kParseError = 2, kStrictFailure = 3, kIoError = 4 };

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stage { validate, propagate, kc, marginals, axioms, reconstruct, ergodic };

const char* to_string(Stage stage);

struct SeedSpec {
  enum class Source { builtin, step_maps, classical };
  Source source = Source::builtin;
  std::string builtin;
  double parameter = 1.0;  // Volterra a
  bool homogeneous = true;
  std::vector<SuperMapd> maps;
  std::vector<CubicTensor> tensors;
};

struct Scenario {
  std::string name;
  AlgebraKind algebra = AlgebraKind::full;
  int dim = 0;
  SeedSpec seed;
  Matrixd initial_state;
  ProcessType type = ProcessType::A;
  int horizon = 0;
  Tolerances tol;
  int ensemble_size = 20;
  std::vector<StatePair> pairs_m;
  std::vector<StatePair> pairs_mm;
  ErgodicConfig ergodic;
  std::optional<std::uint64_t> run_seed;
  std::vector<Stage> pipeline;
  Json source;  // canonical echo of the parsed document
};

Scenario parse_scenario(const Json& doc);
Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::filesystem::path& path);

struct RunOptions {
  Mode mode = Mode::strict;
  std::optional<std::uint64_t> seed;
};

struct StageResult {
  std::string stage;
  bool ok = true;
  Json data;

  friend bool operator==(const StageResult&, const StageResult&) = default;
};

struct SeriesRow {
  int t = 0;
  int pair_index = 0;
  double distance = 0.0;

  friend bool operator==(const SeriesRow&, const SeriesRow&) = default;
};

struct DecaySeries {
  std::string family;
  std::vector<SeriesRow> rows;

  friend bool operator==(const DecaySeries&, const DecaySeries&) = default;
};

struct Report {
  std::string tool_version = kToolVersion;
  std::uint64_t seed = kDefaultSeed;
  std::string mode = "strict";
  Json scenario;
  std::vector<StageResult> stages;
  Json verdicts = Json::object();
  std::optional<std::string> failure;
  std::vector<std::vector<double>> omega_diagonals;
  std::vector<DecaySeries> decay;

  friend bool operator==(const Report&, const Report&) = default;
};

struct Timing {
  std::string stage;
  double seconds = 0.0;
};

struct RunResult {
  Report report;
  std::vector<Timing> timings;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

Json to_json(const Report& report);
Report report_from_json(const Json& doc);

enum class Format { structured, csv_bundle };

/// Writes <name>.report.json; csv-bundle adds <name>.omega.csv and one
/// <name>.decay_<family>.csv per family. Returns the files written.
std::vector<std::filesystem::path> emit_report(const Report& report, Format format, const std::filesystem::path& out_dir);

std::string decay_csv(const DecaySeries& series);
std::string omega_csv(const std::vector<std::vector<double>>& diagonals);

/// Built-in scenario documents.
std::vector<std::string> builtin_names();
Json builtin_scenario(const std::string& name);

}  // namespace qqsp::cli
