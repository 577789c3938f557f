#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "uiodrem/csv.hpp"
#include "uiodrem/pipeline.hpp"
#include "uiodrem/scenario.hpp"
#include "uiodrem/sweep.hpp"

namespace fs = std::filesystem;
using namespace uiodrem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive state estimation pipeline simulator"};
  std::string config_path;
  std::string scenario_name;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool no_noise = false;
  double duration = 0.0;
  double dt = 0.0;
  std::string sweep_text;
  unsigned threads = 0;
  bool list = false;

  auto* config_opt = app.add_option("--config", config_path, "Scenario YAML file");
  auto* scenario_opt = app.add_option("--scenario", scenario_name, "Builtin scenario name (paper_sec5)");
  config_opt->excludes(scenario_opt);
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Noise seed");
  app.add_flag("--no-noise", no_noise, "Disable measurement noise");
  auto* duration_opt = app.add_option("--duration", duration, "Horizon in seconds")->check(CLI::PositiveNumber);
  auto* dt_opt = app.add_option("--dt", dt, "Step size in seconds")->check(CLI::PositiveNumber);
  app.add_option("--sweep", sweep_text, "Parameter sweep FIELD=lo:hi:n");
  app.add_option("--threads", threads, "Sweep workers, 0 = all cores");
  app.add_flag("--list-scenarios", list, "Print builtin scenario names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& name : builtin_scenario_names()) std::cout << name << "\n";
    return 0;
  }

  try {
    YAML::Node doc;
    if (!config_path.empty()) {
      doc = load_scenario_node(config_path);
    } else {
      doc = builtin_scenario_node(scenario_name.empty() ? "paper_sec5" : scenario_name);
    }
    if (no_noise) doc["noise"]["enabled"] = false;
    if (*seed_opt) doc["noise"]["seed"] = seed;
    if (*duration_opt) doc["simulation"]["duration"] = duration;
    if (*dt_opt) doc["simulation"]["dt"] = dt;

    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "config_echo", emit_yaml(doc));

    if (!sweep_text.empty()) {
      const SweepSpec spec = parse_sweep(sweep_text);
      const auto rows = run_sweep(doc, spec, threads);
      const fs::path path = fs::path(out_dir) / "sweep.csv";
      emit_sweep_csv(rows, spec, path.string());
      std::size_t failed = 0;
      for (const auto& row : rows) {
        if (!row.ok) {
          ++failed;
          std::cerr << "row " << row.index << " (" << spec.field << " = " << row.value << ") failed: " << row.error
                    << "\n";
        }
      }
      std::cout << "sweep: " << rows.size() - failed << "/" << rows.size() << " rows ok, table " << path.string()
                << "\n";
      return 0;
    }

    const Scenario scenario = parse_scenario(doc);
    const RunResult result = run_scenario(scenario);
    emit_csv(result.trajectory, (fs::path(out_dir) / "timeseries.csv").string());
    emit_report_csv(result.report.metrics(), (fs::path(out_dir) / "report.csv").string());
    for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& [name, value] : result.report.metrics()) std::cout << name << " = " << format_double(value) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
