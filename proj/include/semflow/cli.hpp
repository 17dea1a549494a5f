#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semflow/executor.hpp"

namespace semflow {

/// {source, ops, policy?, cardinality_overrides?, catalog_path?, provider?: {mode, rules_path?, ...}}
struct PipelineFile {
  std::string source;
  json ops = json::array();
  std::optional<Policy> policy;
  json cardinality_overrides = json::object();
  std::filesystem::path catalog_path;
  std::string provider_mode = "mock";
  std::filesystem::path rules_path;
  std::optional<HttpProviderConfig> real_provider;

  /// Relative paths are resolved against `base_dir`.
  static PipelineFile from_json(const json& j, const std::filesystem::path& base_dir = ".");
  static PipelineFile load(const std::filesystem::path& file);
};

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNoFeasiblePlan = 2, kExitProvider = 3 };

struct RunOptions {
  std::filesystem::path pipeline;
  std::optional<std::string> policy_json;
  std::filesystem::path catalog;
  std::filesystem::path mock_rules;
  std::filesystem::path out;
  std::filesystem::path stats_out;
  bool explain = false;
  std::size_t workers = 1;
  /// Registry file mapping source ids to directories.
  std::filesystem::path datasets;
  /// Fallback: the source id names a directory under this root.
  std::filesystem::path data_root = ".";
};

/// Executes (or explains) a pipeline file. Records go to `out` when no
/// output path is set; diagnostics go to `err`.
int run_command(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Pretty-printed, key-sorted file contents shared by the CLI and service.
std::string records_file_text(const std::vector<Record>& records);
std::string stats_file_text(const ExecutionStats& stats);

/// One row per enumerated plan in enumeration order.
std::string explain_table(const PlanChoice& choice, const Policy& policy, const CardinalityModel& card);

}  // namespace semflow
