#include <sstream>

#include "semflow/agent.hpp"
#include "semflow/error.hpp"

namespace semflow {

namespace {

std::string arg_string(const json& args, const std::string& name) {
  const auto& v = args.at(name);
  if (v.is_null()) return {};
  if (!v.is_string()) throw Error(ErrorCode::InvalidArguments, "argument '" + name + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> arg_string_list(const json& args, const std::string& name) {
  const auto& v = args.at(name);
  if (!v.is_array()) throw Error(ErrorCode::InvalidArguments, "argument '" + name + "' must be a list");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw Error(ErrorCode::InvalidArguments, "argument '" + name + "' must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

const LogicalPlan& require_plan(const PipelineState& state) {
  if (!state.plan) {
    throw Error(ErrorCode::NoPipeline, "no input dataset is set yet; call register_dataset first");
  }
  return *state.plan;
}

std::string describe_plan(const LogicalPlan& plan) {
  std::string out;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (i > 0) out += " > ";
    out += op_type(plan.ops()[i]);
  }
  return out;
}

void clear_results(PipelineState& state) {
  state.results.reset();
  state.results_schema.reset();
  state.stats.reset();
}

std::string field_list(const Schema& schema) {
  std::string out;
  for (const auto& f : schema.fields()) {
    if (!out.empty()) out += ", ";
    out += f.name;
  }
  return out;
}

std::string handle_register_dataset(PipelineState& state, const json& args, ToolContext& ctx) {
  const std::string id = arg_string(args, "dataset_id");
  const std::string path = arg_string(args, "path");
  if (id.empty()) throw Error(ErrorCode::InvalidArguments, "dataset_id must not be empty");

  DataSource src;
  if (!path.empty()) {
    std::filesystem::path p(path);
    if (p.is_relative()) p = ctx.dataset_root / p;
    src = ctx.datasets.register_dataset(id, p);
  } else if (auto found = ctx.datasets.find(id)) {
    src = *found;
  } else if (std::error_code ec; std::filesystem::is_directory(ctx.dataset_root / id, ec)) {
    src = ctx.datasets.register_dataset(id, ctx.dataset_root / id);
  } else {
    throw Error(ErrorCode::UnknownSource, "no dataset named '" + id + "' has been uploaded or registered");
  }

  std::size_t count = scan(src, *ctx.datasets.extractor()).size();
  state.dataset_id = id;
  state.plan = plan_scan(src);
  clear_results(state);

  std::ostringstream os;
  os << "Input dataset set to '" << id << "': " << count << " records with schema "
     << src.detected_schema->name() << " (" << field_list(*src.detected_schema) << ").";
  return os.str();
}

std::string handle_create_schema(PipelineState& state, const json& args, ToolContext&) {
  auto schema = make_schema(arg_string(args, "schema_name"), arg_string(args, "schema_description"),
                            arg_string_list(args, "field_names"),
                            arg_string_list(args, "field_descriptions"));
  state.schemas[schema->name()] = schema;
  return "Created schema " + schema->name() + " with fields: " + field_list(*schema) + ".";
}

std::string handle_add_filter(PipelineState& state, const json& args, ToolContext&) {
  const std::string predicate = arg_string(args, "predicate");
  state.plan = plan_filter(require_plan(state), predicate);
  clear_results(state);
  return "Added filter \"" + predicate + "\". Pipeline: " + describe_plan(*state.plan) + ".";
}

std::string handle_add_convert(PipelineState& state, const json& args, ToolContext&) {
  const std::string name = arg_string(args, "schema_name");
  SchemaPtr target;
  if (auto it = state.schemas.find(name); it != state.schemas.end()) {
    target = it->second;
  } else if (auto builtin = builtin_schema(name)) {
    target = *builtin;
  } else {
    throw Error(ErrorCode::InvalidArguments,
                "unknown schema '" + name + "'; create it with create_schema first");
  }
  std::string card_text = arg_string(args, "cardinality");
  Cardinality card = cardinality_from_string(card_text.empty() ? "one_to_one" : card_text);
  std::string desc = arg_string(args, "description");
  if (desc.empty()) desc = target->doc();

  state.plan = plan_convert(require_plan(state), target, card, desc);
  clear_results(state);
  return "Added conversion to " + name + " (" + std::string(to_string(card)) +
         "). Pipeline: " + describe_plan(*state.plan) + ".";
}

std::string handle_set_policy(PipelineState& state, const json& args, ToolContext&) {
  const std::string type = arg_string(args, "policy");
  json spec = {{"type", type}};
  const json& limit = args.at("limit");
  if (type == "max_quality_at_cost" || type == "max_quality_at_time") {
    if (!limit.is_number()) {
      throw Error(ErrorCode::InvalidArguments, "policy " + type + " needs a numeric limit");
    }
    spec[type == "max_quality_at_cost" ? "budget_usd" : "latency_s"] = limit;
  }
  state.policy = policy_from_json(spec);
  clear_results(state);
  return "Optimization policy set to " + describe(*state.policy) + ".";
}

std::string handle_execute(PipelineState& state, const json&, ToolContext& ctx) {
  const LogicalPlan& plan = require_plan(state);
  if (auto diags = validate_plan(plan); !diags.empty()) {
    throw Error(ErrorCode::InvalidPlan, diags.front());
  }
  if (!state.policy) state.policy = MaxQuality{};
  ExecutionContext exec{ctx.datasets, ctx.provider, ctx.catalog, ctx.udfs, ctx.card, ctx.workers};
  auto result = execute(plan, *state.policy, exec);

  std::ostringstream os;
  os << "Executed plan " << result.chosen.key() << " for " << describe(*state.policy) << ": "
     << result.records.size() << " output records, total cost $" << result.stats.total_cost_usd
     << ", total time " << result.stats.total_time_s << " s.";
  constexpr std::size_t kPreview = 10;
  for (std::size_t i = 0; i < result.records.size() && i < kPreview; ++i) {
    os << "\n" << record_to_json(result.records[i]).at("values").dump();
  }
  if (result.records.size() > kPreview) os << "\n... and " << result.records.size() - kPreview << " more";

  state.results = std::move(result.records);
  state.results_schema = output_schema(plan);
  state.stats = std::move(result.stats);
  return os.str();
}

std::string handle_get_stats(PipelineState& state, const json&, ToolContext&) {
  if (!state.stats) throw Error(ErrorCode::NoPipeline, "the pipeline has not been executed yet");
  const auto& s = *state.stats;
  std::ostringstream os;
  os << "Plan " << s.plan << ": total cost $" << s.total_cost_usd << ", total time "
     << s.total_time_s << " s.";
  for (const auto& op : s.per_op) {
    os << "\n" << op.op << ": " << op.records_in << " in, " << op.records_out << " out, "
       << op.model_calls << " model calls, " << op.failures << " failures, $" << op.cost_usd << ", "
       << op.time_s << " s";
  }
  return os.str();
}

std::string handle_export(PipelineState& state, const json&, ToolContext&) {
  auto bundle = export_code(state);
  return bundle.script + "\nPipeline file:\n" + bundle.pipeline_file;
}

}  // namespace

ToolRegistry ToolRegistry::with_builtins() {
  ToolRegistry reg;
  reg.register_tool(
      {"register_dataset",
       "Choose the input dataset the pipeline reads; every file (or item) becomes one record. "
       "Use this first, when the user names or uploads a collection of documents. Leave path "
       "empty for datasets that were already uploaded.",
       {{"dataset_id", "str", "Name of the dataset, e.g. \"reports-2024\"", std::nullopt},
        {"path", "str", "Directory holding the files; empty for an uploaded dataset", json("")}},
       "dataset = Dataset(source={{ dataset_id }}, path={{ path }})",
       handle_register_dataset});

  reg.register_tool(
      {"create_schema",
       "Declare a record type whose fields a later add_convert fills in. Call it when the user "
       "asks for structured values the current records lack, passing parallel lists, e.g. "
       "schema_name \"Invoice\", field_names [\"number\", \"total\"], field_descriptions "
       "[\"Invoice number\", \"Amount due in EUR\"].",
       {{"schema_name", "str", "Identifier for the schema", std::nullopt},
        {"schema_description", "str", "What one instance of the schema represents", std::nullopt},
        {"field_names", "list", "Identifiers of the fields", std::nullopt},
        {"field_descriptions", "list", "One description per field, same order", std::nullopt}},
       "schemas[{{ schema_name }}] = Schema(doc={{ schema_description }}, "
       "fields=dict(zip({{ field_names }}, {{ field_descriptions }})))",
       handle_create_schema});

  reg.register_tool(
      {"add_filter",
       "Keep only the records that satisfy a condition written in natural language. Use it when "
       "the user wants a subset of the documents, e.g. \"The report mentions a merger\".",
       {{"predicate", "str", "Condition each kept record must satisfy", std::nullopt}},
       "dataset = dataset.filter({{ predicate }})",
       handle_add_filter});

  reg.register_tool(
      {"add_convert",
       "Extract the fields of a schema from every record, producing records of that schema. Use "
       "it after create_schema. Set cardinality to one_to_many when a single document can yield "
       "several results (e.g. every dataset cited in a paper), otherwise one_to_one.",
       {{"schema_name", "str", "Name of a schema created earlier", std::nullopt},
        {"cardinality", "str", "one_to_one or one_to_many", json("one_to_one")},
        {"description", "str", "Task description; defaults to the schema description", json("")}},
       "dataset = dataset.convert({{ schema_name }}, desc={{ description }}, "
       "cardinality={{ cardinality }})",
       handle_add_convert});

  reg.register_tool(
      {"set_policy",
       "Set what the optimizer should favour when it picks models: max_quality, min_cost, "
       "min_time, max_quality_at_cost (limit = budget in USD) or max_quality_at_time (limit = "
       "seconds). Use it when the user states a preference or before running the pipeline.",
       {{"policy", "str", "One of the policy names above", std::nullopt},
        {"limit", "number", "Budget or latency for the constrained policies", json(nullptr)}},
       "policy = Policy({{ policy }}, limit={{ limit }})",
       handle_set_policy});

  reg.register_tool(
      {"execute_pipeline",
       "Optimize and run the pipeline built so far and return the output records. Use it when "
       "the user asks to run the pipeline or to see results. Uses max_quality if no policy is set.",
       {},
       "records, execution_stats = execute(dataset, policy=policy)",
       handle_execute});

  reg.register_tool(
      {"get_stats",
       "Report runtime, cost and per-operator statistics of the last execution. Use it when the "
       "user asks how long the run took or how much it cost.",
       {},
       "print(execution_stats)",
       handle_get_stats});

  reg.register_tool(
      {"export_code",
       "Produce a script and a pipeline file reproducing the current pipeline. Use it when the "
       "user wants to download or continue working on the code.",
       {},
       "export(dataset, policy)",
       handle_export});
  return reg;
}

}  // namespace semflow
