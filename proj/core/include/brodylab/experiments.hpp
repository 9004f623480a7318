#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "brodylab/common.hpp"

#include <json.hpp>

namespace brodylab {

struct ExperimentConfig {
  std::string name;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::string output_dir = ".";

  bool has(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::vector<double> get_real_list(const std::string& key,
                                    const std::vector<double>& fallback) const;
};

/// Flat `key = value` file; `#` starts a comment. Recognized housekeeping
/// keys: `seed` (integer). Everything else lands in params.
ExperimentConfig load_config(const std::string& path);

struct Metric {
  double value = 0.0;
  double uncertainty = 0.0;
};

struct ExperimentReport {
  std::string name;
  std::string anchor;
  std::map<std::string, std::string> config_echo;
  std::uint64_t seed = 0;
  std::map<std::string, Metric> metrics;
  std::map<std::string, std::string> verdicts;  // pass | fail | inconclusive
  double runtime_seconds = 0.0;
  std::vector<std::string> artifacts;

  bool all_pass() const;
};

struct ExperimentInfo {
  std::string name;
  std::string anchor;
};

const std::vector<ExperimentInfo>& registered_experiments();

/// Runs the named experiment and writes report.json plus any CSV plot files
/// into config.output_dir. A numeric failure inside the experiment yields a
/// report whose sole verdict is "inconclusive" rather than a throw; unknown
/// names still throw InvalidParameter (a usage error for the CLI).
ExperimentReport run_experiment(const ExperimentConfig& config);

nlohmann::json report_to_json(const ExperimentReport& report);

/// Deterministic serialization with all floating-point numbers rendered at
/// 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace brodylab
