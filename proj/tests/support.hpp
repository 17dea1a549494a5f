#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include "semflow/agent.hpp"
#include "semflow/error.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path fixtures() { return fs::path(SEMFLOW_FIXTURES_DIR); }

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline semflow::json read_json(const fs::path& p) { return semflow::json::parse(read_text(p)); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("semflow-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

template <typename F>
semflow::ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const semflow::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a semflow::Error");
}

inline semflow::ModelCatalog fixture_catalog() {
  return semflow::ModelCatalog::load(fixtures() / "catalog.json");
}

inline const std::string kPredicate = "The papers are about colorectal cancer";

inline semflow::SchemaPtr clinical_schema() {
  return semflow::make_schema("ClinicalData", "A schema for extracting clinical data datasets from papers.",
                              {"name", "description", "url"},
                              {"The name of the clinical data dataset",
                               "A short description of the content of the dataset",
                               "The public URL where the dataset can be accessed"});
}

/// Scan of the 11-paper fixture followed by filter and one-to-many convert.
inline semflow::LogicalPlan scenario_plan(semflow::DatasetRegistry& registry) {
  auto src = registry.register_dataset("sigmod-demo", fixtures() / "sigmod-demo");
  auto plan = semflow::plan_filter(semflow::plan_scan(src), kPredicate);
  return semflow::plan_convert(plan, clinical_schema(), semflow::Cardinality::OneToMany,
                               clinical_schema()->doc());
}

}  // namespace testing

namespace testing {

/// Random plan built only through the builders; invalid appends are skipped.
inline semflow::LogicalPlan random_plan(std::mt19937& rng, const semflow::DataSource& src,
                                        std::size_t max_ops) {
  using namespace semflow;
  LogicalPlan plan = plan_scan(src);
  const std::size_t target = 1 + rng() % max_ops;
  int attempts = 0;
  while (plan.size() < target && attempts++ < 50) {
    try {
      switch (rng() % 7) {
        case 0:
        case 1:
          plan = plan_filter(plan, "predicate " + std::to_string(rng() % 5));
          break;
        case 2:
          plan = plan_filter_udf(plan, "has_contents");
          break;
        case 3: {
          auto s = make_schema("T" + std::to_string(rng() % 3), "doc", {"a", "b"}, {"first", "second"});
          plan = plan_convert(plan, s, rng() % 2 ? Cardinality::OneToMany : Cardinality::OneToOne, "task");
          break;
        }
        case 4:
          plan = plan_convert(plan, output_schema(plan), Cardinality::OneToOne, "same");
          break;
        case 5:
          plan = plan_aggregate(plan, AggregateFn::Count);
          break;
        default:
          plan = plan_limit(plan, 1 + static_cast<std::int64_t>(rng() % 10));
          break;
      }
    } catch (const semflow::Error&) {
    }
  }
  return plan;
}

inline semflow::ModelCatalog random_catalog(std::mt19937& rng, std::size_t max_models) {
  std::vector<semflow::ModelProfile> models;
  const std::size_t n = 1 + rng() % max_models;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    models.push_back({"m" + std::to_string(i), u(rng) * 0.01, u(rng) * 5.0, 0.05 + 0.95 * u(rng), {}, {}});
  }
  return semflow::ModelCatalog(std::move(models));
}

/// Implementation count per operator, derived from the operator kinds alone.
/// Identity converts are recognised by comparing serialized schemas.
inline std::size_t product_rule_count(const semflow::LogicalPlan& plan, std::size_t models) {
  using namespace semflow;
  auto shape = [](const SchemaPtr& s) {
    json j = schema_to_json(*s);
    j.erase("doc");
    return j;
  };
  std::size_t count = 1;
  json current;
  for (const auto& op : plan.ops()) {
    if (const auto* scan_op = std::get_if<ScanOp>(&op)) {
      current = shape(scan_op->schema);
    } else if (const auto* f = std::get_if<FilterOp>(&op)) {
      count *= f->is_udf() ? 1 : models;
    } else if (const auto* c = std::get_if<ConvertOp>(&op)) {
      json target = shape(c->target);
      count *= target == current ? 1 : models;
      current = target;
    } else if (std::holds_alternative<AggregateOp>(op)) {
      current = shape(aggregate_schema());
    }
  }
  return count;
}

}  // namespace testing

namespace testing {

/// Plan set with random estimates; `coarse` draws from five levels so that
/// ties are common. Keys are distinct.
inline std::vector<semflow::PhysicalPlan> random_plan_set(std::mt19937& rng, std::size_t max_plans,
                                                          bool coarse) {
  using namespace semflow;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] { return coarse ? static_cast<double>(rng() % 5) / 4.0 : u(rng); };
  std::vector<PhysicalPlan> plans(1 + rng() % max_plans);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    plans[i].logical_id = "L";
    plans[i].ops = {PhysicalOperator{0, ImplKind::DirectScan, {}, {}},
                    PhysicalOperator{1, ImplKind::LLMFilter, "m" + std::to_string(rng() % 1000) + "_" + std::to_string(i), {}}};
    plans[i].estimate = {draw(), draw(), draw()};
  }
  return plans;
}

inline semflow::Policy random_policy(std::mt19937& rng) {
  using namespace semflow;
  std::uniform_real_distribution<double> u(0.01, 1.0);
  switch (rng() % 5) {
    case 0: return MaxQuality{};
    case 1: return MinCost{};
    case 2: return MinTime{};
    case 3: return MaxQualityAtCost{u(rng)};
    default: return MaxQualityAtTime{u(rng)};
  }
}

/// Brute-force selection: smallest ranking tuple over the feasible plans.
/// nullopt when nothing is feasible.
inline std::optional<std::string> brute_force_select(const std::vector<semflow::PhysicalPlan>& plans,
                                                     const semflow::Policy& policy) {
  using namespace semflow;
  using Rank = std::tuple<double, double, double, double, std::string>;
  std::optional<Rank> best;
  for (const auto& p : plans) {
    const auto& e = p.estimate;
    double primary = 0.0;
    bool feasible = true;
    if (std::holds_alternative<MaxQuality>(policy)) {
      primary = -e.quality;
    } else if (std::holds_alternative<MinCost>(policy)) {
      primary = e.cost_usd;
    } else if (std::holds_alternative<MinTime>(policy)) {
      primary = e.time_s;
    } else if (const auto* c = std::get_if<MaxQualityAtCost>(&policy)) {
      feasible = e.cost_usd <= c->budget_usd;
      primary = -e.quality;
    } else if (const auto* t = std::get_if<MaxQualityAtTime>(&policy)) {
      feasible = e.time_s <= t->latency_s;
      primary = -e.quality;
    }
    if (!feasible) continue;
    Rank r{primary, e.cost_usd, e.time_s, -e.quality, p.key()};
    if (!best || r < *best) best = r;
  }
  if (!best) return std::nullopt;
  return std::get<4>(*best);
}

/// O(n^2) dominance check: the non-dominated plans' keys, in input order.
inline std::vector<std::string> brute_force_frontier(const std::vector<semflow::PhysicalPlan>& plans) {
  std::vector<std::string> keys;
  for (const auto& b : plans) {
    bool dominated = false;
    for (const auto& a : plans) {
      const auto& x = a.estimate;
      const auto& y = b.estimate;
      bool no_worse = x.cost_usd <= y.cost_usd && x.time_s <= y.time_s && x.quality >= y.quality;
      bool better = x.cost_usd < y.cost_usd || x.time_s < y.time_s || x.quality > y.quality;
      dominated = dominated || (no_worse && better);
    }
    if (!dominated) keys.push_back(b.key());
  }
  return keys;
}

}  // namespace testing

namespace testing {

inline std::vector<std::string> random_items(std::mt19937& rng) {
  static const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "omega"};
  std::vector<std::string> items(rng() % 9);
  for (auto& item : items) {
    for (int w = 0; w < 3; ++w) item += words[rng() % words.size()] + " ";
  }
  return items;
}

/// Rules mixing valid, malformed and retry-only answers for filters and converts.
inline std::vector<semflow::MockRule> random_rules(std::mt19937& rng) {
  static const std::vector<std::string> answers{
      "true", "false", "Yes, it does.", "maybe", R"({"a": "x", "b": "y"})",
      R"([{"a": "1"}, {"a": "2", "b": "3"}])", "[]", "```json\n{\"a\": \"z\"}\n```", "[{\"a\": 4}]"};
  static const std::vector<std::string> matches{"alpha", "beta", "gamma", "a = x", "b = 3",
                                                std::string(semflow::kFilterRetrySuffix)};
  std::vector<semflow::MockRule> rules;
  const std::size_t n = 1 + rng() % 4;
  for (std::size_t k = 0; k < n; ++k) {
    rules.push_back({matches[rng() % matches.size()], answers[rng() % answers.size()],
                     static_cast<std::int64_t>(rng() % 50), static_cast<std::int64_t>(rng() % 20),
                     static_cast<double>(rng() % 8) * 0.25, false});
  }
  rules.push_back({"", answers[rng() % answers.size()], 3, 1, 0.5, false});
  return rules;
}

struct MockRun {
  std::vector<semflow::Record> records;
  semflow::ExecutionStats stats;
  std::map<std::string, std::int64_t> calls;
};

inline MockRun execute_mock(const semflow::LogicalPlan& plan, const semflow::Policy& policy,
                            const std::vector<semflow::MockRule>& rules, const semflow::ModelCatalog& catalog,
                            const semflow::DatasetRegistry& reg, std::size_t workers) {
  semflow::MockProvider mock(rules);
  auto udfs = semflow::UdfRegistry::with_builtins();
  semflow::ExecutionContext ctx{reg, mock, catalog, udfs, {}, workers};
  auto result = semflow::execute(plan, policy, ctx);
  return {std::move(result.records), std::move(result.stats), mock.call_counts()};
}

/// One randomized mock execution checked for conservation, lineage,
/// accounting, determinism and worker-count independence. Returns the
/// violated invariants; an infeasible policy counts as a skip (nullopt).
inline std::optional<std::vector<std::string>> random_run_violations(std::mt19937& rng) {
  using namespace semflow;
  DatasetRegistry reg;
  auto src = reg.register_memory("mem", random_items(rng));
  auto plan = random_plan(rng, src, 6);
  auto rules = random_rules(rng);
  auto catalog = random_catalog(rng, 3);
  Policy policy = rng() % 3 == 0 ? Policy{MaxQuality{}} : random_policy(rng);

  MockRun serial;
  try {
    serial = execute_mock(plan, policy, rules, catalog, reg, 1);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoFeasiblePlan) return std::nullopt;
    return std::vector<std::string>{std::string("unexpected error: ") + e.what()};
  }

  std::vector<std::string> v;
  auto expect = [&v](bool ok, const std::string& what) {
    if (!ok) v.push_back(what);
  };

  const auto& stats = serial.stats;
  if (stats.per_op.size() != plan.size()) return std::vector<std::string>{"per_op length"};
  double time = 0.0;
  double cost = 0.0;
  std::int64_t calls = 0;
  bool aggregated = false;
  for (std::size_t k = 0; k < stats.per_op.size(); ++k) {
    const auto& op = stats.per_op[k];
    const auto& lop = plan.ops()[k];
    const std::string at = " at op " + std::to_string(k);
    time += op.time_s;
    cost += op.cost_usd;
    calls += op.model_calls;
    if (k + 1 < stats.per_op.size()) expect(op.records_out == stats.per_op[k + 1].records_in, "flow" + at);
    if (std::holds_alternative<FilterOp>(lop)) expect(op.records_out <= op.records_in, "filter grew" + at);
    if (const auto* c = std::get_if<ConvertOp>(&lop); c && c->cardinality == Cardinality::OneToOne) {
      expect(op.records_out <= op.records_in, "one-to-one convert grew" + at);
    }
    if (std::holds_alternative<AggregateOp>(lop)) {
      aggregated = true;
      expect(op.records_out == 1, "aggregate output" + at);
    }
    if (const auto* l = std::get_if<LimitOp>(&lop)) {
      expect(op.records_out == std::min(op.records_in, l->n), "limit" + at);
    }
    if (op.op.rfind("LLMFilter", 0) == 0) {
      expect(op.model_calls >= op.records_in && op.model_calls <= 2 * op.records_in, "filter calls" + at);
    }
  }
  expect(stats.total_time_s == time, "total time");
  expect(stats.total_cost_usd == cost, "total cost");

  std::int64_t counted = 0;
  double expected_cost = 0.0;
  for (const auto& [model, n] : serial.calls) {
    counted += n;
    expected_cost += static_cast<double>(n) * catalog.get(model).usd_per_call;
  }
  expect(counted == calls, "model calls");
  expect(std::abs(stats.total_cost_usd - expected_cost) <= 1e-9 * std::max(1.0, expected_cost),
         "cost accounting");

  if (!aggregated) {
    std::set<std::string> seen;
    for (const auto& r : serial.records) {
      expect(seen.insert(r.id).second, "duplicate id " + r.id);
      auto base = r.id.substr(0, r.id.find('#'));
      expect(base.rfind("mem/mem-", 0) == 0, "lineage root " + r.id);
      if (r.id == base) {
        expect(r.parents.empty(), "scan record with parents " + r.id);
      } else {
        expect(r.parents.size() == 1 && r.parents[0] == r.id.substr(0, r.id.rfind('#')),
               "lineage parent " + r.id);
      }
    }
  }

  auto same = [](const MockRun& a, const MockRun& b) {
    return records_to_json(a.records) == records_to_json(b.records) &&
           stats_to_json(a.stats) == stats_to_json(b.stats);
  };
  expect(same(execute_mock(plan, policy, rules, catalog, reg, 1), serial), "determinism");
  expect(same(execute_mock(plan, policy, rules, catalog, reg, 4), serial), "parallel differs");
  return v;
}

}  // namespace testing

namespace testing {

inline std::string random_text(std::mt19937& rng, bool multiline) {
  static const std::vector<std::string> words{"plan", "the", "papers", "{x}", "\"quoted\"", "a:b",
                                              "50%", "Thought", "none", "tab\there"};
  std::string out;
  const std::size_t n = 1 + rng() % 8;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += (multiline && rng() % 4 == 0) ? "\n" : " ";
    out += words[rng() % words.size()];
  }
  return out;
}

inline semflow::json random_json(std::mt19937& rng, int depth) {
  using semflow::json;
  switch (rng() % (depth > 1 ? 4 : 6)) {
    case 0: return random_text(rng, true);
    case 1: return static_cast<int>(rng() % 1000) - 500;
    case 2: return rng() % 2 == 0;
    case 3: return nullptr;
    case 4: {
      json arr = json::array();
      const std::size_t n = rng() % 4;
      for (std::size_t i = 0; i < n; ++i) arr.push_back(random_json(rng, depth + 1));
      return arr;
    }
    default: {
      json obj = json::object();
      const std::size_t n = rng() % 4;
      for (std::size_t i = 0; i < n; ++i) obj["k" + std::to_string(i)] = random_json(rng, depth + 1);
      return obj;
    }
  }
}

inline semflow::AgentStep random_step(std::mt19937& rng) {
  using namespace semflow;
  std::string thought = rng() % 3 == 0 ? "" : random_text(rng, true);
  switch (rng() % 3) {
    case 0: return Thought{random_text(rng, true)};
    case 1: {
      json args = json::object();
      const std::size_t n = rng() % 4;
      for (std::size_t i = 0; i < n; ++i) args["arg" + std::to_string(i)] = random_json(rng, 0);
      return Action{thought, "tool_" + std::to_string(rng() % 10), args, {}};
    }
    default: return FinalAnswer{thought, random_text(rng, true)};
  }
}

/// Bindings for every declared argument of `spec`; some strings are
/// themselves placeholders.
inline semflow::json random_bindings(std::mt19937& rng, const semflow::ToolSpec& spec) {
  semflow::json bindings = semflow::json::object();
  for (const auto& a : spec.args) {
    bindings[a.name] = rng() % 4 == 0 ? semflow::json("{{ " + a.name + " }}") : random_json(rng, 0);
  }
  return bindings;
}

}  // namespace testing
