#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "semflow/dataset.hpp"
#include "semflow/schema.hpp"

namespace semflow {

enum class Cardinality { OneToOne, OneToMany };
std::string_view to_string(Cardinality c) noexcept;
Cardinality cardinality_from_string(std::string_view text);

enum class AggregateFn { Count, Average };

struct ScanOp {
  std::string source_id;
  SchemaPtr schema;
};

/// Exactly one of `predicate` (natural language) or `udf_name` is non-empty.
struct FilterOp {
  std::string predicate;
  std::string udf_name;

  [[nodiscard]] bool is_udf() const noexcept { return !udf_name.empty(); }
};

struct ConvertOp {
  SchemaPtr target;
  Cardinality cardinality = Cardinality::OneToOne;
  std::string desc;
  bool identity = false;  // target is structurally equal to the input schema
};

struct AggregateOp {
  AggregateFn fn = AggregateFn::Count;
  std::string field;  // Average only
};

struct LimitOp {
  std::int64_t n = 1;
};

using LogicalOperator = std::variant<ScanOp, FilterOp, ConvertOp, AggregateOp, LimitOp>;

std::string_view op_type(const LogicalOperator& op) noexcept;

/// Immutable chain of logical operators. The id is a content hash of the
/// canonical serialization, so equal plans always share an id.
class LogicalPlan {
 public:
  LogicalPlan();
  explicit LogicalPlan(std::vector<LogicalOperator> ops);

  [[nodiscard]] const std::vector<LogicalOperator>& ops() const noexcept { return ops_; }
  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] bool empty() const noexcept { return ops_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return ops_.size(); }
  [[nodiscard]] const std::string& source_id() const;

  friend bool operator==(const LogicalPlan& a, const LogicalPlan& b) { return a.id_ == b.id_; }

 private:
  std::vector<LogicalOperator> ops_;
  std::string id_;
};

// Builders. All are pure: the input plan is never modified.
LogicalPlan plan_scan(const DatasetRegistry& registry, const std::string& source_id);
LogicalPlan plan_scan(const DataSource& source);
LogicalPlan plan_filter(const LogicalPlan& plan, const std::string& predicate);
LogicalPlan plan_filter_udf(const LogicalPlan& plan, const std::string& udf_name);
LogicalPlan plan_convert(const LogicalPlan& plan, SchemaPtr target, Cardinality cardinality,
                         const std::string& desc);
LogicalPlan plan_aggregate(const LogicalPlan& plan, AggregateFn fn, const std::string& field = {});
LogicalPlan plan_limit(const LogicalPlan& plan, std::int64_t n);
LogicalPlan without_last(const LogicalPlan& plan);

/// Schema flowing into each operator (null for the scan and wherever the
/// chain is broken), plus the final output schema.
std::vector<SchemaPtr> input_schemas(const LogicalPlan& plan);
SchemaPtr output_schema(const LogicalPlan& plan);

/// Empty iff every plan invariant holds. Messages are prefixed `op <i>:`.
std::vector<std::string> validate_plan(const LogicalPlan& plan);

/// Pipeline-file `ops` entries (every operator after the scan).
json op_to_json(const LogicalOperator& op);
json plan_ops_to_json(const LogicalPlan& plan);
/// Structural parse only: an ill-formed chain parses and is reported by
/// validate_plan. Unknown sources throw UnknownSource.
LogicalPlan plan_from_json(const std::string& source_id, const json& ops,
                           const DatasetRegistry& registry);
LogicalPlan plan_from_json(const DataSource& source, const json& ops);

/// Every operator including the scan (with its schema); used for snapshots.
json plan_to_json(const LogicalPlan& plan);
LogicalPlan plan_from_full_json(const json& ops);

}  // namespace semflow
