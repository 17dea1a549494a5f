#include "semflow/executor.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace semflow {

// ---------------------------------------------------------------------------
// Prompts

namespace {

void append_record_block(std::string& out, const Record& record) {
  out += "RECORD:\n";
  const auto& fields = record.schema->fields();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out += fields[i].name;
    out += " = ";
    out += value_to_text(record.values[i]);
    out += '\n';
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string filter_prompt(const Record& record, const std::string& predicate) {
  std::string out = "FILTER\nPREDICATE: " + predicate + "\n";
  append_record_block(out, record);
  out += "Answer true or false.";
  return out;
}

std::string convert_prompt(const Record& record, const std::vector<FieldSpec>& target_fields,
                           const std::string& desc) {
  std::string out = "CONVERT\nTASK: " + desc + "\nTARGET FIELDS:\n";
  for (const auto& f : target_fields) out += f.name + ": " + f.description + "\n";
  append_record_block(out, record);
  out += "Respond with JSON.";
  return out;
}

std::optional<bool> parse_filter_answer(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    std::string word(text.substr(start, i - start));
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (word == "true" || word == "yes") return true;
    if (word == "false" || word == "no") return false;
  }
  return std::nullopt;
}

std::optional<std::vector<json>> parse_convert_answer(std::string_view text, Cardinality card) {
  text = trim(text);
  if (text.substr(0, 3) == "```") {
    auto nl = text.find('\n');
    if (nl == std::string_view::npos) return std::nullopt;
    text.remove_prefix(nl + 1);
    auto fence = text.rfind("```");
    if (fence != std::string_view::npos) text = text.substr(0, fence);
    text = trim(text);
  }
  json parsed = json::parse(text.begin(), text.end(), nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;

  std::vector<json> objects;
  if (parsed.is_object()) {
    objects.push_back(std::move(parsed));
  } else if (parsed.is_array()) {
    for (auto& item : parsed) {
      if (!item.is_object()) return std::nullopt;
      objects.push_back(std::move(item));
    }
    if (card == Cardinality::OneToOne && objects.size() != 1) return std::nullopt;
  } else {
    return std::nullopt;
  }
  return objects;
}

// ---------------------------------------------------------------------------
// Operators

void CallTally::add(const CompletionResponse& response, const ModelProfile& model) {
  ++calls;
  latency_s += response.latency_s;
  bool token_priced = model.usd_per_input_token && model.usd_per_output_token &&
                      (response.input_tokens > 0 || response.output_tokens > 0);
  if (token_priced) {
    token_cost_usd += static_cast<double>(response.input_tokens) * *model.usd_per_input_token +
                      static_cast<double>(response.output_tokens) * *model.usd_per_output_token;
  } else {
    ++per_call_priced;
  }
}

CallTally& CallTally::operator+=(const CallTally& other) {
  calls += other.calls;
  failures += other.failures;
  per_call_priced += other.per_call_priced;
  token_cost_usd += other.token_cost_usd;
  latency_s += other.latency_s;
  return *this;
}

double CallTally::cost_usd(const ModelProfile& model) const {
  return static_cast<double>(per_call_priced) * model.usd_per_call + token_cost_usd;
}

FilterOutcome run_llm_filter(const Record& record, const std::string& predicate,
                             const ModelProfile& model, ModelProvider& provider) {
  FilterOutcome out;
  const std::string prompt = filter_prompt(record, predicate);
  auto first = provider.complete({model.id, prompt});
  out.tally.add(first, model);
  if (auto answer = parse_filter_answer(first.text)) {
    out.keep = *answer;
    return out;
  }
  auto retry = provider.complete({model.id, prompt + "\n" + std::string(kFilterRetrySuffix)});
  out.tally.add(retry, model);
  if (auto answer = parse_filter_answer(retry.text)) {
    out.keep = *answer;
    return out;
  }
  out.tally.failures = 1;
  out.keep = false;
  return out;
}

ConvertOutcome run_llm_convert(const Record& record, const SchemaPtr& target,
                               Cardinality cardinality, const std::string& desc,
                               const ModelProfile& model, ModelProvider& provider) {
  ConvertOutcome out;
  json copied = json::object();
  std::vector<FieldSpec> missing;
  for (const auto& f : target->fields()) {
    if (record.schema->has_field(f.name)) {
      copied[f.name] = value_to_json(record.get(f.name));
    } else {
      missing.push_back(f);
    }
  }

  auto emit = [&](std::vector<json> objects) {
    for (std::size_t k = 0; k < objects.size(); ++k) {
      json raw = std::move(objects[k]);
      for (const auto& [name, value] : copied.items()) raw[name] = value;
      out.records.push_back(
          conform_record(raw, target, {record.id}, record.id + "#" + std::to_string(k)));
    }
  };

  if (missing.empty()) {
    emit({json::object()});
    return out;
  }

  const std::string prompt = convert_prompt(record, missing, desc);
  auto first = provider.complete({model.id, prompt});
  out.tally.add(first, model);
  if (auto objects = parse_convert_answer(first.text, cardinality)) {
    emit(std::move(*objects));
    return out;
  }
  auto retry = provider.complete({model.id, prompt + "\n" + std::string(kConvertRetrySuffix)});
  out.tally.add(retry, model);
  if (auto objects = parse_convert_answer(retry.text, cardinality)) {
    emit(std::move(*objects));
    return out;
  }
  out.tally.failures = 1;
  return out;
}

Record run_aggregate(const std::vector<Record>& records, const AggregateOp& fn, std::string id) {
  std::vector<std::string> parents;
  parents.reserve(records.size());
  for (const auto& r : records) parents.push_back(r.id);

  double value = 0.0;
  if (fn.fn == AggregateFn::Count) {
    value = static_cast<double>(records.size());
  } else {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (const auto* d = std::get_if<double>(&r.get(fn.field))) {
        sum += *d;
        ++n;
      }
    }
    if (n == 0) throw Error(ErrorCode::AllNull, "no non-null values of '" + fn.field + "' to average");
    value = sum / static_cast<double>(n);
  }
  return conform_record({{"value", value}}, aggregate_schema(), std::move(parents), std::move(id));
}

std::vector<Record> run_limit(std::vector<Record> records, std::int64_t n) {
  if (n >= 0 && records.size() > static_cast<std::size_t>(n)) records.resize(static_cast<std::size_t>(n));
  return records;
}

// ---------------------------------------------------------------------------
// Stats

json stats_to_json(const ExecutionStats& stats) {
  json per_op = json::array();
  for (const auto& op : stats.per_op) {
    per_op.push_back({{"op", op.op},
                      {"records_in", op.records_in},
                      {"records_out", op.records_out},
                      {"time_s", op.time_s},
                      {"cost_usd", op.cost_usd},
                      {"model_calls", op.model_calls},
                      {"failures", op.failures}});
  }
  return {{"total_time_s", stats.total_time_s},
          {"total_cost_usd", stats.total_cost_usd},
          {"plan", stats.plan},
          {"estimate",
           {{"cost_usd", stats.estimate.cost_usd},
            {"time_s", stats.estimate.time_s},
            {"quality", stats.estimate.quality}}},
          {"per_op", std::move(per_op)}};
}

ExecutionStats stats_from_json(const json& j) {
  try {
    ExecutionStats s;
    s.total_time_s = j.at("total_time_s").get<double>();
    s.total_cost_usd = j.at("total_cost_usd").get<double>();
    s.plan = j.value("plan", std::string());
    if (j.contains("estimate")) {
      const auto& e = j.at("estimate");
      s.estimate = {e.at("cost_usd").get<double>(), e.at("time_s").get<double>(),
                    e.at("quality").get<double>()};
    }
    for (const auto& op : j.at("per_op")) {
      s.per_op.push_back({op.at("op").get<std::string>(), op.at("records_in").get<std::int64_t>(),
                          op.at("records_out").get<std::int64_t>(), op.at("time_s").get<double>(),
                          op.at("cost_usd").get<double>(), op.at("model_calls").get<std::int64_t>(),
                          op.at("failures").get<std::int64_t>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed execution stats: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Plan choice and execution

PlanChoice choose_plan(const LogicalPlan& logical, const Policy& policy, const ModelCatalog& catalog,
                       const UdfRegistry& udfs, const CardinalityModel& card) {
  PlanChoice choice;
  choice.plans = enumerate_physical_plans(logical, catalog, udfs, card);
  choice.frontier = pareto_prune(choice.plans);
  choice.chosen = select_plan(choice.frontier, policy);
  return choice;
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results land at
/// their input index, so output order never depends on scheduling. If any
/// call throws, remaining work is abandoned and the first exception is
/// returned alongside whatever finished.
template <class Out, class Fn>
std::pair<std::vector<std::optional<Out>>, std::exception_ptr> parallel_map(std::size_t n,
                                                                            std::size_t workers,
                                                                            Fn fn) {
  std::vector<std::optional<Out>> results(n);
  std::exception_ptr failure;
  if (workers <= 1 || n <= 1) {
    try {
      for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
    } catch (...) {
      failure = std::current_exception();
    }
    return {std::move(results), failure};
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  auto worker = [&] {
    while (!stop.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return {std::move(results), failure};
}

void finalize_totals(ExecutionStats& stats) {
  stats.total_time_s = 0.0;
  stats.total_cost_usd = 0.0;
  for (const auto& op : stats.per_op) {
    stats.total_time_s += op.time_s;
    stats.total_cost_usd += op.cost_usd;
  }
}

[[noreturn]] void fail_with_stats(std::exception_ptr failure, ExecutionStats& stats) {
  finalize_totals(stats);
  try {
    std::rethrow_exception(failure);
  } catch (const Error& e) {
    throw ExecutionError(e.code(), e.what(), stats);
  } catch (const std::exception& e) {
    throw ExecutionError(ErrorCode::ProviderUnavailable, e.what(), stats);
  }
}

}  // namespace

ExecutionResult execute(const LogicalPlan& logical, const Policy& policy, const ExecutionContext& ctx) {
  auto diags = validate_plan(logical);
  if (!diags.empty()) throw Error(ErrorCode::InvalidPlan, diags.front());

  const DataSource source = ctx.datasets.get(logical.source_id());
  std::vector<Record> current = scan(source, *ctx.datasets.extractor());

  CardinalityModel card = ctx.card;
  if (card.input_count <= 0.0) card.input_count = static_cast<double>(current.size());
  PlanChoice choice = choose_plan(logical, policy, ctx.catalog, ctx.udfs, card);

  ExecutionResult result;
  result.chosen = choice.chosen;
  ExecutionStats& stats = result.stats;
  stats.plan = choice.chosen.key();
  stats.estimate = choice.chosen.estimate;

  const bool simulated_clock = ctx.provider.deterministic_clock();
  using clock = std::chrono::steady_clock;

  for (const auto& pop : choice.chosen.ops) {
    const auto& lop = logical.ops().at(pop.logical_ref);
    OperatorStats op_stats;
    op_stats.op = pop.descriptor();
    op_stats.records_in = static_cast<std::int64_t>(current.size());
    auto started = clock::now();
    CallTally tally;
    const ModelProfile* model = pop.uses_model() ? &ctx.catalog.get(pop.model_id) : nullptr;

    switch (pop.impl) {
      case ImplKind::DirectScan:
        break;
      case ImplKind::LLMFilter: {
        const auto& f = std::get<FilterOp>(lop);
        auto [outcomes, failure] = parallel_map<FilterOutcome>(
            current.size(), ctx.workers,
            [&](std::size_t i) { return run_llm_filter(current[i], f.predicate, *model, ctx.provider); });
        std::vector<Record> kept;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          if (!outcomes[i]) continue;
          tally += outcomes[i]->tally;
          if (outcomes[i]->keep) kept.push_back(current[i]);
        }
        if (failure) {
          op_stats.model_calls = tally.calls;
          op_stats.failures = tally.failures;
          op_stats.cost_usd = tally.cost_usd(*model);
          op_stats.time_s = tally.latency_s;
          stats.per_op.push_back(op_stats);
          fail_with_stats(failure, stats);
        }
        current = std::move(kept);
        break;
      }
      case ImplKind::UDFFilter: {
        const auto& udf = ctx.udfs.get(pop.udf_name);
        std::vector<Record> kept;
        for (auto& r : current) {
          if (udf(r)) kept.push_back(std::move(r));
        }
        current = std::move(kept);
        break;
      }
      case ImplKind::LLMConvert: {
        const auto& c = std::get<ConvertOp>(lop);
        auto [outcomes, failure] = parallel_map<ConvertOutcome>(
            current.size(), ctx.workers, [&](std::size_t i) {
              return run_llm_convert(current[i], c.target, c.cardinality, c.desc, *model, ctx.provider);
            });
        std::vector<Record> produced;
        for (auto& o : outcomes) {
          if (!o) continue;
          tally += o->tally;
          for (auto& r : o->records) produced.push_back(std::move(r));
        }
        if (failure) {
          op_stats.model_calls = tally.calls;
          op_stats.failures = tally.failures;
          op_stats.cost_usd = tally.cost_usd(*model);
          op_stats.time_s = tally.latency_s;
          stats.per_op.push_back(op_stats);
          fail_with_stats(failure, stats);
        }
        current = std::move(produced);
        break;
      }
      case ImplKind::IdentityConvert:
        break;
      case ImplKind::ExactAggregate: {
        const auto& a = std::get<AggregateOp>(lop);
        try {
          current = {run_aggregate(current, a, source.id + "/aggregate")};
        } catch (const Error& e) {
          stats.per_op.push_back(op_stats);
          finalize_totals(stats);
          throw ExecutionError(e.code(), e.what(), stats);
        }
        break;
      }
      case ImplKind::PassLimit:
        current = run_limit(std::move(current), std::get<LimitOp>(lop).n);
        break;
    }

    op_stats.records_out = static_cast<std::int64_t>(current.size());
    op_stats.model_calls = tally.calls;
    op_stats.failures = tally.failures;
    op_stats.cost_usd = model ? tally.cost_usd(*model) : 0.0;
    if (simulated_clock) {
      op_stats.time_s = model ? tally.latency_s
                              : static_cast<double>(op_stats.records_in) * kNonModelSecondsPerRecord;
    } else {
      op_stats.time_s = std::chrono::duration<double>(clock::now() - started).count();
    }
    stats.per_op.push_back(std::move(op_stats));
  }

  finalize_totals(stats);
  result.records = std::move(current);
  return result;
}

}  // namespace semflow
