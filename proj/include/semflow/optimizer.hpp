#pragma once

#include <string>
#include <variant>
#include <vector>

#include "semflow/catalog.hpp"

namespace semflow {

struct MaxQuality {
  friend bool operator==(const MaxQuality&, const MaxQuality&) = default;
};
struct MinCost {
  friend bool operator==(const MinCost&, const MinCost&) = default;
};
struct MinTime {
  friend bool operator==(const MinTime&, const MinTime&) = default;
};
struct MaxQualityAtCost {
  double budget_usd = 0.0;
  friend bool operator==(const MaxQualityAtCost&, const MaxQualityAtCost&) = default;
};
struct MaxQualityAtTime {
  double latency_s = 0.0;
  friend bool operator==(const MaxQualityAtTime&, const MaxQualityAtTime&) = default;
};

using Policy = std::variant<MaxQuality, MinCost, MinTime, MaxQualityAtCost, MaxQualityAtTime>;

/// {"type":"max_quality"} | {"type":"min_cost"} | {"type":"min_time"} |
/// {"type":"max_quality_at_cost","budget_usd":x} | {"type":"max_quality_at_time","latency_s":x}
json policy_to_json(const Policy& policy);
Policy policy_from_json(const json& j);
std::string describe(const Policy& policy);

/// Strict "is preferred to" under the policy's objective, followed by the
/// tie-break chain: lower cost, lower time, higher quality, smaller plan key.
/// Feasibility of constrained policies is not considered here.
bool preferred(const PhysicalPlan& a, const PhysicalPlan& b, const Policy& policy);

/// Best plan for the policy. Throws EmptyPlanSet, or NoFeasiblePlan when a
/// constrained policy admits no plan (the message carries the smallest
/// overshoot of the constraint).
PhysicalPlan select_plan(const std::vector<PhysicalPlan>& plans, const Policy& policy);

/// a dominates b: no worse in cost, time and quality, strictly better in one.
bool dominates(const PlanEstimate& a, const PlanEstimate& b) noexcept;

/// Non-dominated subset, preserving input order.
std::vector<PhysicalPlan> pareto_prune(const std::vector<PhysicalPlan>& plans);

}  // namespace semflow
