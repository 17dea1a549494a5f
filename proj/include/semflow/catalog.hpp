#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semflow/logical_plan.hpp"
#include "semflow/schema.hpp"

namespace semflow {

struct ModelProfile {
  std::string id;
  double usd_per_call = 0.0;
  double seconds_per_call = 0.0;
  double quality = 1.0;  // (0, 1]
  // Optional token pricing. When both are set and the provider reports token
  // counts, execution cost uses them instead of usd_per_call.
  std::optional<double> usd_per_input_token;
  std::optional<double> usd_per_output_token;
};

/// Set of models available to physical operators, kept sorted by id.
class ModelCatalog {
 public:
  ModelCatalog() = default;
  explicit ModelCatalog(std::vector<ModelProfile> models);

  [[nodiscard]] const std::vector<ModelProfile>& models() const noexcept { return models_; }
  [[nodiscard]] bool empty() const noexcept { return models_.empty(); }
  [[nodiscard]] const ModelProfile* find(const std::string& id) const noexcept;
  [[nodiscard]] const ModelProfile& get(const std::string& id) const;

  /// [{id, usd_per_call, seconds_per_call, quality}]
  static ModelCatalog from_json(const json& j);
  static ModelCatalog load(const std::filesystem::path& file);
  [[nodiscard]] json to_json() const;

 private:
  std::vector<ModelProfile> models_;
};

using UdfFunction = std::function<bool(const Record&)>;

class UdfRegistry {
 public:
  void add(const std::string& name, UdfFunction fn);
  [[nodiscard]] bool contains(const std::string& name) const;
  [[nodiscard]] const UdfFunction& get(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> names() const;

  /// has_contents: keeps records whose `contents` field is non-null and non-empty.
  static UdfRegistry with_builtins();

 private:
  std::map<std::string, UdfFunction> fns_;
};

enum class ImplKind {
  DirectScan,
  LLMFilter,
  UDFFilter,
  LLMConvert,
  IdentityConvert,
  ExactAggregate,
  PassLimit,
};

struct PhysicalOperator {
  std::size_t logical_ref = 0;
  ImplKind impl = ImplKind::DirectScan;
  std::string model_id;  // LLMFilter, LLMConvert
  std::string udf_name;  // UDFFilter

  [[nodiscard]] bool uses_model() const noexcept {
    return impl == ImplKind::LLMFilter || impl == ImplKind::LLMConvert;
  }
  /// e.g. `LLMFilter(strong)`, `IdentityConvert`.
  [[nodiscard]] std::string descriptor() const;

  friend bool operator==(const PhysicalOperator&, const PhysicalOperator&) = default;
};

struct PlanEstimate {
  double cost_usd = 0.0;
  double time_s = 0.0;
  double quality = 1.0;

  friend bool operator==(const PlanEstimate&, const PlanEstimate&) = default;
};

struct PhysicalPlan {
  std::string logical_id;
  std::vector<PhysicalOperator> ops;
  PlanEstimate estimate;
  std::shared_ptr<const LogicalPlan> logical;

  /// Descriptors joined in operator order; the final tie-breaker in selection.
  [[nodiscard]] std::string key() const;
};

json physical_plan_to_json(const PhysicalPlan& plan);

struct CardinalityModel {
  double input_count = 0.0;
  double filter_selectivity = 0.5;
  double one_to_one_fanout = 1.0;
  double one_to_many_fanout = 3.0;

  void validate() const;
  /// Applies {input_count?, filter_selectivity?, convert_fanout?} overrides.
  void apply_overrides(const json& overrides);
  [[nodiscard]] json to_json() const;
};

/// Fixed per-record time charged to operators that make no model call.
inline constexpr double kNonModelSecondsPerRecord = 0.001;

/// Estimated records entering each operator, plus the count leaving the last.
std::vector<double> estimated_flow(const LogicalPlan& logical, const CardinalityModel& card);

PlanEstimate estimate_plan(const PhysicalPlan& plan, const CardinalityModel& card,
                           const ModelCatalog& catalog);

/// Implementation choices for one operator, in catalog (model id) order.
std::vector<PhysicalOperator> implementations(const LogicalPlan& logical, std::size_t index,
                                              const ModelCatalog& catalog,
                                              const UdfRegistry& udfs);

/// Every combination of per-operator implementations, each with its estimate,
/// in lexicographic (operator index, model id) order.
std::vector<PhysicalPlan> enumerate_physical_plans(const LogicalPlan& logical,
                                                   const ModelCatalog& catalog,
                                                   const UdfRegistry& udfs,
                                                   const CardinalityModel& card = {});

}  // namespace semflow
