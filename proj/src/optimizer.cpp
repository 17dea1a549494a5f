#include "semflow/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "semflow/error.hpp"
#include "semflow/overloaded.hpp"

namespace semflow {

json policy_to_json(const Policy& policy) {
  return std::visit(
      overloaded{[](const MaxQuality&) -> json { return {{"type", "max_quality"}}; },
                 [](const MinCost&) -> json { return {{"type", "min_cost"}}; },
                 [](const MinTime&) -> json { return {{"type", "min_time"}}; },
                 [](const MaxQualityAtCost& p) -> json {
                   return {{"type", "max_quality_at_cost"}, {"budget_usd", p.budget_usd}};
                 },
                 [](const MaxQualityAtTime& p) -> json {
                   return {{"type", "max_quality_at_time"}, {"latency_s", p.latency_s}};
                 }},
      policy);
}

Policy policy_from_json(const json& j) {
  auto positive = [](double v, const char* what) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw Error(ErrorCode::InvalidPolicy, std::string(what) + " must be strictly positive");
    }
    return v;
  };
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "max_quality") return MaxQuality{};
    if (type == "min_cost") return MinCost{};
    if (type == "min_time") return MinTime{};
    if (type == "max_quality_at_cost") {
      return MaxQualityAtCost{positive(j.at("budget_usd").get<double>(), "budget_usd")};
    }
    if (type == "max_quality_at_time") {
      return MaxQualityAtTime{positive(j.at("latency_s").get<double>(), "latency_s")};
    }
    throw Error(ErrorCode::InvalidPolicy, "unknown policy type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidPolicy, std::string("malformed policy: ") + e.what());
  }
}

std::string describe(const Policy& policy) {
  return std::visit(overloaded{[](const MaxQuality&) -> std::string { return "maximum quality"; },
                               [](const MinCost&) -> std::string { return "minimum cost"; },
                               [](const MinTime&) -> std::string { return "minimum time"; },
                               [](const MaxQualityAtCost& p) -> std::string {
                                 std::ostringstream os;
                                 os << "maximum quality with cost <= $" << p.budget_usd;
                                 return os.str();
                               },
                               [](const MaxQualityAtTime& p) -> std::string {
                                 std::ostringstream os;
                                 os << "maximum quality with time <= " << p.latency_s << " s";
                                 return os.str();
                               }},
                    policy);
}

namespace {

enum class Objective { Quality, Cost, Time };

Objective objective_of(const Policy& policy) {
  if (std::holds_alternative<MinCost>(policy)) return Objective::Cost;
  if (std::holds_alternative<MinTime>(policy)) return Objective::Time;
  return Objective::Quality;
}

// Returns <0 if a is better, >0 if b is better, 0 if tied.
int compare_on(const PlanEstimate& a, const PlanEstimate& b, Objective obj) {
  auto cmp = [](double x, double y) { return x < y ? -1 : (y < x ? 1 : 0); };
  switch (obj) {
    case Objective::Cost: return cmp(a.cost_usd, b.cost_usd);
    case Objective::Time: return cmp(a.time_s, b.time_s);
    case Objective::Quality: return cmp(b.quality, a.quality);
  }
  return 0;
}

bool feasible(const PlanEstimate& e, const Policy& policy) {
  if (const auto* c = std::get_if<MaxQualityAtCost>(&policy)) return e.cost_usd <= c->budget_usd;
  if (const auto* t = std::get_if<MaxQualityAtTime>(&policy)) return e.time_s <= t->latency_s;
  return true;
}

}  // namespace

bool preferred(const PhysicalPlan& a, const PhysicalPlan& b, const Policy& policy) {
  for (Objective obj : {objective_of(policy), Objective::Cost, Objective::Time, Objective::Quality}) {
    int c = compare_on(a.estimate, b.estimate, obj);
    if (c != 0) return c < 0;
  }
  return a.key() < b.key();
}

PhysicalPlan select_plan(const std::vector<PhysicalPlan>& plans, const Policy& policy) {
  if (plans.empty()) throw Error(ErrorCode::EmptyPlanSet, "no physical plans to choose from");
  const PhysicalPlan* best = nullptr;
  double tightest = std::numeric_limits<double>::infinity();
  for (const auto& p : plans) {
    if (!feasible(p.estimate, policy)) {
      double over = std::holds_alternative<MaxQualityAtCost>(policy)
                        ? p.estimate.cost_usd - std::get<MaxQualityAtCost>(policy).budget_usd
                        : p.estimate.time_s - std::get<MaxQualityAtTime>(policy).latency_s;
      tightest = std::min(tightest, over);
      continue;
    }
    if (best == nullptr || preferred(p, *best, policy)) best = &p;
  }
  if (best == nullptr) {
    std::ostringstream os;
    os << "no plan satisfies " << describe(policy) << "; the closest plan exceeds it by "
       << tightest << (std::holds_alternative<MaxQualityAtCost>(policy) ? " USD" : " s");
    throw Error(ErrorCode::NoFeasiblePlan, os.str());
  }
  return *best;
}

bool dominates(const PlanEstimate& a, const PlanEstimate& b) noexcept {
  bool no_worse = a.cost_usd <= b.cost_usd && a.time_s <= b.time_s && a.quality >= b.quality;
  bool better = a.cost_usd < b.cost_usd || a.time_s < b.time_s || a.quality > b.quality;
  return no_worse && better;
}

std::vector<PhysicalPlan> pareto_prune(const std::vector<PhysicalPlan>& plans) {
  // Sweep in (cost, time, -quality) order: any dominator of a plan sorts
  // strictly before it, and a dominated plan is always dominated by some
  // frontier member, so each plan is only checked against the frontier.
  std::vector<std::size_t> order(plans.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = plans[x].estimate;
    const auto& b = plans[y].estimate;
    if (a.cost_usd != b.cost_usd) return a.cost_usd < b.cost_usd;
    if (a.time_s != b.time_s) return a.time_s < b.time_s;
    return a.quality > b.quality;
  });
  std::vector<std::size_t> frontier;
  std::vector<bool> keep(plans.size(), false);
  for (std::size_t idx : order) {
    bool dominated = std::any_of(frontier.begin(), frontier.end(), [&](std::size_t f) {
      return dominates(plans[f].estimate, plans[idx].estimate);
    });
    if (dominated) continue;
    frontier.push_back(idx);
    keep[idx] = true;
  }
  std::vector<PhysicalPlan> out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (keep[i]) out.push_back(plans[i]);
  }
  return out;
}

}  // namespace semflow
