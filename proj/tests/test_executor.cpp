#include <doctest.h>

#include <set>

#include "support.hpp"

using namespace semflow;
using testing::error_of;

namespace {

Record text_record(const std::string& contents) {
  return conform_record({{"filename", "mem-0"}, {"contents", contents}}, text_file_schema(), {}, "m/mem-0");
}

const ModelProfile kModel{"m", 0.25, 1.0, 0.5, {}, {}};

}  // namespace

TEST_SUITE("executor") {

TEST_CASE("prompt templates") {
  auto r = text_record("hello world");
  CHECK(filter_prompt(r, "mentions a greeting") ==
        "FILTER\nPREDICATE: mentions a greeting\nRECORD:\nfilename = mem-0\ncontents = hello world\n"
        "Answer true or false.");
  std::vector<FieldSpec> fields{{"title", "The title", FieldKind::Text}, {"year", "Year", FieldKind::Number}};
  CHECK(convert_prompt(r, fields, "Extract metadata") ==
        "CONVERT\nTASK: Extract metadata\nTARGET FIELDS:\ntitle: The title\nyear: Year\nRECORD:\n"
        "filename = mem-0\ncontents = hello world\nRespond with JSON.");
}

TEST_CASE("filter answers") {
  CHECK(parse_filter_answer("True.") == std::optional<bool>(true));
  CHECK(parse_filter_answer("  no, it is not") == std::optional<bool>(false));
  CHECK(parse_filter_answer("I think YES") == std::optional<bool>(true));
  CHECK_FALSE(parse_filter_answer("yesterday").has_value());
  CHECK_FALSE(parse_filter_answer("").has_value());
  CHECK_FALSE(parse_filter_answer("maybe").has_value());
}

TEST_CASE("convert answers") {
  auto one = parse_convert_answer(R"({"a": 1})", Cardinality::OneToOne);
  REQUIRE(one);
  CHECK(one->size() == 1);
  auto fenced = parse_convert_answer("```json\n[{\"a\": 1}, {\"a\": 2}]\n```", Cardinality::OneToMany);
  REQUIRE(fenced);
  CHECK(fenced->size() == 2);
  CHECK(parse_convert_answer("[]", Cardinality::OneToMany)->empty());
  CHECK_FALSE(parse_convert_answer("[]", Cardinality::OneToOne));
  CHECK_FALSE(parse_convert_answer(R"([{"a":1},{"a":2}])", Cardinality::OneToOne));
  CHECK_FALSE(parse_convert_answer("[1]", Cardinality::OneToMany));
  CHECK_FALSE(parse_convert_answer("sure!", Cardinality::OneToMany));
  CHECK_FALSE(parse_convert_answer("true", Cardinality::OneToOne));
}

TEST_CASE("filter retries once with the suffix") {
  MockProvider mock({{std::string(kFilterRetrySuffix), "true", 0, 0, 2.0, false}, {"", "hmm", 0, 0, 1.0, false}});
  auto out = run_llm_filter(text_record("x"), "p", kModel, mock);
  CHECK(out.keep);
  CHECK(out.tally.calls == 2);
  CHECK(out.tally.failures == 0);
  CHECK(out.tally.latency_s == 3.0);
  CHECK(out.tally.cost_usd(kModel) == 0.5);

  MockProvider stubborn({{"", "hmm", 0, 0, 1.0, false}});
  auto failed = run_llm_filter(text_record("x"), "p", kModel, stubborn);
  CHECK_FALSE(failed.keep);
  CHECK(failed.tally.calls == 2);
  CHECK(failed.tally.failures == 1);
}

TEST_CASE("convert fills fields, copies shared ones and coerces kinds") {
  auto target = make_schema("Paper", "doc",
                            std::vector<FieldSpec>{{"filename", "file", FieldKind::Text},
                                                   {"year", "Year", FieldKind::Number},
                                                   {"tags", "Tags", FieldKind::TextList}});
  MockProvider mock({{"", R"([{"year": 2021, "tags": ["a"], "filename": "ignored"}, {"year": "soon"}])", 0, 0, 1.0, false}});
  auto out = run_llm_convert(text_record("x"), target, Cardinality::OneToMany, "task", kModel, mock);
  REQUIRE(out.records.size() == 2);
  CHECK(out.records[0].id == "m/mem-0#0");
  CHECK(out.records[1].id == "m/mem-0#1");
  CHECK(out.records[0].parents == std::vector<std::string>{"m/mem-0"});
  CHECK(std::get<std::string>(out.records[0].get("filename")) == "mem-0");
  CHECK(std::get<double>(out.records[0].get("year")) == 2021);
  CHECK(std::get<TextList>(out.records[0].get("tags")) == TextList{"a"});
  CHECK(is_null(out.records[1].get("year")));
  CHECK(is_null(out.records[1].get("tags")));

  MockProvider silent({{"", "", 0, 0, 0.0, true}});
  auto narrowed = make_schema("Narrow", "doc", std::vector<FieldSpec>{{"contents", "c", FieldKind::Text}});
  auto copied = run_llm_convert(text_record("body"), narrowed, Cardinality::OneToOne, "task", kModel, silent);
  REQUIRE(copied.records.size() == 1);
  CHECK(copied.tally.calls == 0);
  CHECK(std::get<std::string>(copied.records[0].get("contents")) == "body");
}

TEST_CASE("convert failure yields nothing") {
  MockProvider mock({{"", "no idea", 0, 0, 1.0, false}});
  auto target = make_schema("T", "doc", {"a"}, {"first"});
  auto out = run_llm_convert(text_record("x"), target, Cardinality::OneToOne, "task", kModel, mock);
  CHECK(out.records.empty());
  CHECK(out.tally.calls == 2);
  CHECK(out.tally.failures == 1);
}

TEST_CASE("token pricing") {
  ModelProfile priced{"t", 1.0, 1.0, 0.5, 0.5, 2.0};
  MockProvider mock({{"", "true", 4, 1, 0.0, false}});
  auto out = run_llm_filter(text_record("x"), "p", priced, mock);
  CHECK(out.tally.cost_usd(priced) == 4 * 0.5 + 1 * 2.0);
  MockProvider untokened({{"", "true", 0, 0, 0.0, false}});
  CHECK(run_llm_filter(text_record("x"), "p", priced, untokened).tally.cost_usd(priced) == 1.0);
}

TEST_CASE("aggregate and limit") {
  auto schema = make_schema("N", "doc", std::vector<FieldSpec>{{"x", "x", FieldKind::Number}});
  std::vector<Record> rs{conform_record({{"x", 1}}, schema, {}, "r0"), conform_record({{"x", nullptr}}, schema, {}, "r1"),
                         conform_record({{"x", 4}}, schema, {}, "r2")};
  auto count = run_aggregate(rs, AggregateOp{AggregateFn::Count, {}}, "agg");
  CHECK(std::get<double>(count.get("value")) == 3);
  CHECK(count.parents == std::vector<std::string>{"r0", "r1", "r2"});
  auto avg = run_aggregate(rs, AggregateOp{AggregateFn::Average, "x"}, "agg");
  CHECK(std::get<double>(avg.get("value")) == 2.5);
  CHECK(error_of([&] { run_aggregate({rs[1]}, AggregateOp{AggregateFn::Average, "x"}, "agg"); }) ==
        ErrorCode::AllNull);
  CHECK(std::get<double>(run_aggregate({}, AggregateOp{AggregateFn::Count, {}}, "agg").get("value")) == 0);
  CHECK(run_limit(rs, 2).size() == 2);
  CHECK(run_limit(rs, 10).size() == 3);
}

TEST_CASE("scenario run under max quality") {
  DatasetRegistry reg;
  auto plan = testing::scenario_plan(reg);
  auto mock = MockProvider::load(testing::fixtures() / "mock_rules.json");
  auto catalog = testing::fixture_catalog();
  auto udfs = UdfRegistry::with_builtins();
  ExecutionContext ctx{reg, mock, catalog, udfs, {}, 1};
  auto result = execute(plan, MaxQuality{}, ctx);

  CHECK(result.stats.plan == "DirectScan > LLMFilter(strong) > LLMConvert(strong)");
  REQUIRE(result.records.size() == 6);
  std::set<std::string> papers;
  for (const auto& r : result.records) papers.insert(r.parents.at(0));
  CHECK(papers == std::set<std::string>{"sigmod-demo/paper02.pdf", "sigmod-demo/paper05.pdf",
                                        "sigmod-demo/paper07.pdf", "sigmod-demo/paper10.pdf"});
  CHECK(result.stats.total_cost_usd == 11 * 0.01 + 4 * 0.01);
  CHECK(mock.call_counts() == std::map<std::string, std::int64_t>{{"strong", 15}});
  REQUIRE(result.stats.per_op.size() == 3);
  CHECK(result.stats.per_op[1].records_out == 4);
  CHECK(result.stats.per_op[1].time_s == 11 * 1.5);
  CHECK(result.stats.per_op[2].time_s == 4 * 6.0);
  CHECK(result.stats.estimate.cost_usd == 0.165);
  CHECK(result.stats.total_time_s == doctest::Approx(40.511).epsilon(1e-12));
}

TEST_CASE("provider outage keeps partial stats") {
  DatasetRegistry reg;
  auto plan = testing::scenario_plan(reg);
  auto rules = MockProvider::load(testing::fixtures() / "mock_rules.json").rules();
  rules.insert(rules.begin(), MockRule{"filename = paper05.pdf", "", 0, 0, 0.0, true});
  MockProvider mock(rules);
  auto catalog = testing::fixture_catalog();
  auto udfs = UdfRegistry::with_builtins();
  ExecutionContext ctx{reg, mock, catalog, udfs, {}, 1};
  try {
    execute(plan, MaxQuality{}, ctx);
    FAIL("expected ProviderUnavailable");
  } catch (const ExecutionError& e) {
    CHECK(e.code() == ErrorCode::ProviderUnavailable);
    const auto& partial = e.partial_stats();
    REQUIRE(partial.per_op.size() == 2);
    CHECK(partial.per_op[1].model_calls == 4);
    CHECK(partial.total_cost_usd == doctest::Approx(0.04));
  }
}

TEST_CASE("empty dataset and invalid plans") {
  DatasetRegistry reg;
  auto empty = reg.register_memory("empty", {});
  auto plan = plan_convert(plan_filter(plan_scan(empty), "p"), testing::clinical_schema(), Cardinality::OneToMany, "d");
  MockProvider mock({{"", "true", 0, 0, 1.0, false}});
  auto catalog = testing::fixture_catalog();
  auto udfs = UdfRegistry::with_builtins();
  ExecutionContext ctx{reg, mock, catalog, udfs, {}, 2};
  auto result = execute(plan, MinCost{}, ctx);
  CHECK(result.records.empty());
  CHECK(result.stats.total_cost_usd == 0.0);
  CHECK(mock.call_counts().empty());

  CHECK(error_of([&] { execute(LogicalPlan(), MinCost{}, ctx); }) == ErrorCode::InvalidPlan);
  CHECK(execute(plan, MaxQualityAtCost{1e-9}, ctx).records.empty());
  CHECK(error_of([&] { execute(testing::scenario_plan(reg), MaxQualityAtCost{1e-9}, ctx); }) ==
        ErrorCode::NoFeasiblePlan);
}

TEST_CASE("random mock runs: conservation, lineage, accounting, determinism, parallelism") {
  std::mt19937 rng(53);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    auto violations = testing::random_run_violations(rng);
    if (!violations) continue;
    ++checked;
    CAPTURE(i);
    CHECK(*violations == std::vector<std::string>{});
  }
  CHECK(checked > 100);
}

}
