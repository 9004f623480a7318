#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "brodylab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"brodylab - numerical experiments on Brody curve dynamics"};
  app.require_subcommand(1);

  auto* list_cmd =
      app.add_subcommand("list", "List registered experiments with anchors");

  std::string experiment, config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  auto* run_cmd = app.add_subcommand("run", "Run a named experiment");
  run_cmd->add_option("experiment", experiment, "Registered experiment name")
      ->required();
  run_cmd->add_option("--config", config_path, "Flat key = value config file")
      ->required();
  auto* seed_opt =
      run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out", out_dir,
                      "Output directory for report.json and plot CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  seed_given = seed_opt->count() > 0;

  if (list_cmd->parsed()) {
    for (const auto& info : brodylab::registered_experiments())
      std::printf("%-24s %s\n", info.name.c_str(), info.anchor.c_str());
    return 0;
  }

  try {
    brodylab::ExperimentConfig config = brodylab::load_config(config_path);
    config.name = experiment;
    if (seed_given) config.seed = seed;
    if (!out_dir.empty()) config.output_dir = out_dir;

    bool known = false;
    for (const auto& info : brodylab::registered_experiments())
      if (info.name == experiment) known = true;
    if (!known) {
      std::fprintf(stderr, "unknown experiment: %s\n", experiment.c_str());
      return 2;
    }

    const brodylab::ExperimentReport report =
        brodylab::run_experiment(config);
    for (const auto& [name, verdict] : report.verdicts)
      std::printf("%-32s %s\n", name.c_str(), verdict.c_str());
    std::printf("report: %s/report.json (%.1fs)\n",
                report.name.empty() ? "." : config.output_dir.c_str(),
                report.runtime_seconds);
    return report.all_pass() ? 0 : 1;
  } catch (const brodylab::InvalidParameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
