// qqsp: run quadratic-process scenarios and emit reports.

#include "qqsp/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace qqsp;
using namespace qqsp::cli;

namespace {

Scenario load(const std::string& target) {
  if (std::filesystem::exists(target)) return parse_scenario_file(target);
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), target) != names.end()) return parse_scenario(builtin_scenario(target));
  throw IoError("no scenario file or built-in named '" + target + "'");
}

void write_timings(const RunResult& result, const std::filesystem::path& out_dir, const std::string& name) {
  Json doc = Json::array();
  for (const auto& t : result.timings) doc.push_back(Json{{"stage", t.stage}, {"seconds", t.seconds}});
  const auto path = out_dir / (name + ".timings.json");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << "\n";
}

void print_summary(const Report& report, const std::vector<std::filesystem::path>& written) {
  for (const auto& s : report.stages) std::cout << (s.ok ? "ok    " : "FAIL  ") << s.stage << "\n";
  for (const auto& [key, value] : report.verdicts.items()) std::cout << key << ": " << value.dump() << "\n";
  if (report.failure) std::cout << "failure: " << *report.failure << "\n";
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic quantum stochastic process toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file (or built-in name)");
  std::string target;
  bool permissive = false;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string format = "structured";
  run->add_option("scenario", target, "Scenario file or built-in name")->required();
  auto* strict_flag = run->add_flag("--strict", "Abort on mathematical failures (default)");
  run->add_flag("--permissive", permissive, "Record mathematical failures and continue")->excludes(strict_flag);
  run->add_option("--out-dir", out_dir, "Directory for report files");
  run->add_option("--seed", seed, "Override the run seed");
  run->add_option("--format", format, "Output format")->check(CLI::IsMember({"structured", "csv-bundle"}));

  app.add_subcommand("list-builtins", "List built-in scenarios");
  auto* describe = app.add_subcommand("describe", "Print a built-in scenario document");
  std::string builtin;
  describe->add_option("builtin", builtin, "Built-in name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (app.got_subcommand("list-builtins")) {
      for (const auto& name : builtin_names()) std::cout << name << "\n";
      return kOk;
    }
    if (app.got_subcommand("describe")) {
      std::cout << builtin_scenario(builtin).dump(2) << "\n";
      return kOk;
    }
    const Scenario scenario = load(target);
    RunOptions options;
    options.mode = permissive ? Mode::permissive : Mode::strict;
    options.seed = seed;
    const RunResult result = run_scenario(scenario, options);
    const auto written =
        emit_report(result.report, format == "csv-bundle" ? Format::csv_bundle : Format::structured, out_dir);
    write_timings(result, out_dir, scenario.name);
    print_summary(result.report, written);
    return result.report.failure ? kStrictFailure : kOk;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  }
}
