#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semflow/catalog.hpp"
#include "semflow/dataset.hpp"
#include "semflow/error.hpp"
#include "semflow/logical_plan.hpp"
#include "semflow/optimizer.hpp"
#include "semflow/provider.hpp"

namespace semflow {

// ---------------------------------------------------------------------------
// Prompt templates. These are part of the external contract; mock rule files
// match against their exact text.

std::string filter_prompt(const Record& record, const std::string& predicate);
std::string convert_prompt(const Record& record, const std::vector<FieldSpec>& target_fields,
                           const std::string& desc);

inline constexpr std::string_view kFilterRetrySuffix =
    "Your previous answer could not be understood. Reply with exactly one word: true or false.";
inline constexpr std::string_view kConvertRetrySuffix =
    "Your previous answer could not be understood. Reply with valid JSON only.";

/// First "true"/"yes" or "false"/"no" word, case-insensitive.
std::optional<bool> parse_filter_answer(std::string_view text);
/// A JSON array of objects (one-to-many) or a single object (one-to-one).
/// Markdown code fences are tolerated. nullopt when unparseable.
std::optional<std::vector<json>> parse_convert_answer(std::string_view text, Cardinality card);

// ---------------------------------------------------------------------------

/// Usage accumulated by one or more model calls made by a single operator.
struct CallTally {
  std::int64_t calls = 0;
  std::int64_t failures = 0;
  std::int64_t per_call_priced = 0;  // calls billed at usd_per_call
  double token_cost_usd = 0.0;       // calls billed by reported tokens
  double latency_s = 0.0;

  void add(const CompletionResponse& response, const ModelProfile& model);
  CallTally& operator+=(const CallTally& other);
  [[nodiscard]] double cost_usd(const ModelProfile& model) const;
};

struct FilterOutcome {
  bool keep = false;
  CallTally tally;
};

struct ConvertOutcome {
  std::vector<Record> records;
  CallTally tally;
};

FilterOutcome run_llm_filter(const Record& record, const std::string& predicate,
                             const ModelProfile& model, ModelProvider& provider);

/// Output ids are `<input id>#<k>`. Target fields that also exist in the
/// input schema are copied and never sent to the model.
ConvertOutcome run_llm_convert(const Record& record, const SchemaPtr& target,
                               Cardinality cardinality, const std::string& desc,
                               const ModelProfile& model, ModelProvider& provider);

Record run_aggregate(const std::vector<Record>& records, const AggregateOp& fn, std::string id);
std::vector<Record> run_limit(std::vector<Record> records, std::int64_t n);

// ---------------------------------------------------------------------------

struct OperatorStats {
  std::string op;
  std::int64_t records_in = 0;
  std::int64_t records_out = 0;
  double time_s = 0.0;
  double cost_usd = 0.0;
  std::int64_t model_calls = 0;
  std::int64_t failures = 0;
};

struct ExecutionStats {
  double total_time_s = 0.0;
  double total_cost_usd = 0.0;
  std::string plan;
  PlanEstimate estimate;
  std::vector<OperatorStats> per_op;
};

json stats_to_json(const ExecutionStats& stats);
ExecutionStats stats_from_json(const json& j);

/// An execution failure that still carries the statistics gathered so far.
class ExecutionError : public Error {
 public:
  ExecutionError(ErrorCode code, const std::string& message, ExecutionStats partial)
      : Error(code, message), partial_(std::move(partial)) {}
  [[nodiscard]] const ExecutionStats& partial_stats() const noexcept { return partial_; }

 private:
  ExecutionStats partial_;
};

struct ExecutionContext {
  const DatasetRegistry& datasets;
  ModelProvider& provider;
  const ModelCatalog& catalog;
  const UdfRegistry& udfs;
  CardinalityModel card;  // input_count 0 means use the scanned count
  std::size_t workers = 1;
};

struct PlanChoice {
  std::vector<PhysicalPlan> plans;     // full enumeration
  std::vector<PhysicalPlan> frontier;  // pareto_prune(plans)
  PhysicalPlan chosen;
};

/// Enumerate, prune and select. Throws NoFeasiblePlan / InvalidPlan.
PlanChoice choose_plan(const LogicalPlan& logical, const Policy& policy, const ModelCatalog& catalog,
                       const UdfRegistry& udfs, const CardinalityModel& card);

struct ExecutionResult {
  std::vector<Record> records;
  ExecutionStats stats;
  PhysicalPlan chosen;
};

ExecutionResult execute(const LogicalPlan& logical, const Policy& policy, const ExecutionContext& ctx);

}  // namespace semflow
