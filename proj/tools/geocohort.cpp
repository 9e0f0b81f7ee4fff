// Command-line driver: one subcommand per pipeline stage.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geocohort/errors.hpp"
#include "geocohort/pipeline.hpp"

namespace gc = geocohort;

int main(int argc, char** argv) {
  CLI::App app{"Infer home locations of social-media users and analyse topic trends by cohort"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  bool print_config = false;
  app.add_option("-c,--config", config_path, "JSON pipeline config");
  app.add_option("-s,--set", overrides, "Override a config value, e.g. dbscan.eps=2.0")
      ->type_name("KEY=VALUE");
  app.add_option("-j,--workers", workers, "Cap on worker threads");
  app.add_option("-o,--output-dir", output_dir, "Artifact directory (paths.output_dir)");
  app.add_flag("--print-config", print_config, "Print the effective config to stdout first");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "Parse the corpus into per-user histories and monthly volumes"},
      {"extract", "Extract and normalize place mentions per user"},
      {"infer", "Cluster geocodes and rank location guesses per user"},
      {"train-confidence", "Fit the positive and negative confidence forests"},
      {"score", "Score every guess and select each user's best"},
      {"evaluate", "Grade selected guesses against annotations"},
      {"topics", "Count topic keywords per month for the red and blue cohorts"},
      {"regress", "Fit the interaction regression per topic"},
      {"export", "Write per-user locations and per-state rates"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: command=- kind=config_invalid message=" << e.what() << '\n';
    return gc::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  if (workers) overrides.push_back("workers=" + std::to_string(*workers));
  if (output_dir) overrides.push_back("paths.output_dir=\"" + *output_dir + "\"");
  gc::PipelineConfig config;
  try {
    config = gc::PipelineConfig::load(
        config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path),
        overrides);
  } catch (const gc::Error& e) {
    std::cerr << "error: command=" << command << " kind=" << gc::to_string(e.kind())
              << " message=" << e.what() << '\n';
    return gc::exit_code_for(e.kind());
  }
  if (print_config) std::cout << config.to_json().dump(2) << '\n';
  return gc::run_command(command, config, std::cout, std::cerr);
}
