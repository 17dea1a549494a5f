#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace semflow;
using testing::error_of;

namespace {

std::vector<PhysicalPlan> fixture_plans() {
  static DatasetRegistry reg;
  CardinalityModel card;
  card.input_count = 11;
  return enumerate_physical_plans(testing::scenario_plan(reg), testing::fixture_catalog(),
                                  UdfRegistry::with_builtins(), card);
}

PhysicalPlan estimate_only(const std::string& name, double cost, double time, double quality) {
  PhysicalPlan p;
  p.ops = {PhysicalOperator{0, ImplKind::LLMFilter, name, {}}};
  p.estimate = {cost, time, quality};
  return p;
}

std::vector<std::string> keys(const std::vector<PhysicalPlan>& plans) {
  std::vector<std::string> out;
  for (const auto& p : plans) out.push_back(p.key());
  return out;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("fixture plans under each policy") {
  auto plans = fixture_plans();
  CHECK(select_plan(plans, MaxQuality{}).key() == "DirectScan > LLMFilter(strong) > LLMConvert(strong)");
  CHECK(select_plan(plans, MinCost{}).key() == "DirectScan > LLMFilter(cheap) > LLMConvert(cheap)");
  CHECK(select_plan(plans, MinTime{}).key() == "DirectScan > LLMFilter(cheap) > LLMConvert(cheap)");
  // 0.066 fits a 0.1 budget; 0.1155 and 0.165 do not.
  CHECK(select_plan(plans, MaxQualityAtCost{0.1}).key() == "DirectScan > LLMFilter(cheap) > LLMConvert(strong)");
  CHECK(select_plan(plans, MaxQualityAtTime{50}).key() == "DirectScan > LLMFilter(cheap) > LLMConvert(strong)");
}

TEST_CASE("single plan and empty set") {
  auto plans = fixture_plans();
  std::vector<PhysicalPlan> one{plans[2]};
  CHECK(select_plan(one, MinCost{}).key() == plans[2].key());
  CHECK(select_plan(one, MaxQualityAtTime{1000}).key() == plans[2].key());
  CHECK(error_of([] { select_plan({}, MaxQuality{}); }) == ErrorCode::EmptyPlanSet);
}

TEST_CASE("infeasible constraint reports the overshoot") {
  auto plans = fixture_plans();
  try {
    select_plan(plans, MaxQualityAtCost{0.001});
    FAIL("expected NoFeasiblePlan");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoFeasiblePlan);
    CHECK(std::string(e.what()).find("0.0155") != std::string::npos);
  }
}

TEST_CASE("constraint boundary is inclusive") {
  auto plans = fixture_plans();
  CHECK(select_plan(plans, MaxQualityAtCost{0.165}).key() == "DirectScan > LLMFilter(strong) > LLMConvert(strong)");
}

TEST_CASE("ties break by cost, time, quality, then key") {
  std::vector<PhysicalPlan> plans{estimate_only("b", 1, 1, 0.5), estimate_only("a", 1, 1, 0.5),
                                  estimate_only("c", 0.5, 2, 0.5)};
  CHECK(select_plan(plans, MaxQuality{}).key() == "LLMFilter(c)");
  plans.pop_back();
  CHECK(select_plan(plans, MaxQuality{}).key() == "LLMFilter(a)");
  std::vector<PhysicalPlan> by_quality{estimate_only("a", 1, 1, 0.4), estimate_only("b", 1, 1, 0.6)};
  CHECK(select_plan(by_quality, MinCost{}).key() == "LLMFilter(b)");
}

TEST_CASE("pareto examples") {
  std::vector<PhysicalPlan> ab{estimate_only("A", 1, 1, 0.9), estimate_only("B", 2, 2, 0.9)};
  CHECK(keys(pareto_prune(ab)) == std::vector<std::string>{"LLMFilter(A)"});
  std::vector<PhysicalPlan> incomparable{estimate_only("A", 1, 2, 0.5), estimate_only("B", 2, 1, 0.9)};
  CHECK(pareto_prune(incomparable).size() == 2);
  auto plans = fixture_plans();
  CHECK(keys(pareto_prune(plans)) == testing::brute_force_frontier(plans));
  CHECK(pareto_prune(plans).size() == 3);
}

TEST_CASE("dominance") {
  CHECK(dominates({1, 1, 0.9}, {2, 1, 0.9}));
  CHECK_FALSE(dominates({1, 1, 0.9}, {1, 1, 0.9}));
  CHECK_FALSE(dominates({1, 2, 0.9}, {2, 1, 0.9}));
}

TEST_CASE("select_plan matches brute force, survives pruning and permutation") {
  std::mt19937 rng(41);
  for (int i = 0; i < 400; ++i) {
    auto plans = testing::random_plan_set(rng, 60, i % 2 == 0);
    auto policy = testing::random_policy(rng);
    auto expected = testing::brute_force_select(plans, policy);
    if (!expected) {
      CHECK(error_of([&] { select_plan(plans, policy); }) == ErrorCode::NoFeasiblePlan);
      continue;
    }
    CHECK(select_plan(plans, policy).key() == *expected);
    CHECK(select_plan(pareto_prune(plans), policy).key() == *expected);
    std::shuffle(plans.begin(), plans.end(), rng);
    CHECK(select_plan(plans, policy).key() == *expected);
  }
}

TEST_CASE("pareto_prune matches the pairwise oracle and is idempotent") {
  std::mt19937 rng(43);
  for (int i = 0; i < 300; ++i) {
    auto plans = testing::random_plan_set(rng, 80, i % 2 == 0);
    auto pruned = pareto_prune(plans);
    CHECK(keys(pruned) == testing::brute_force_frontier(plans));
    CHECK(keys(pareto_prune(pruned)) == keys(pruned));
  }
}

TEST_CASE("policy JSON") {
  CHECK(policy_to_json(MaxQuality{}) == json{{"type", "max_quality"}});
  CHECK(policy_to_json(MaxQualityAtCost{0.5}) == json{{"type", "max_quality_at_cost"}, {"budget_usd", 0.5}});
  CHECK(policy_from_json(json{{"type", "max_quality_at_time"}, {"latency_s", 30}}) == Policy{MaxQualityAtTime{30}});
  CHECK(policy_from_json(json{{"type", "min_time"}}) == Policy{MinTime{}});
  CHECK(error_of([] { policy_from_json(json{{"type", "max_quality_at_cost"}, {"budget_usd", 0}}); }) ==
        ErrorCode::InvalidPolicy);
  CHECK(error_of([] { policy_from_json(json{{"type", "fastest"}}); }) == ErrorCode::InvalidPolicy);
}

}
