#include <map>
#include <sstream>

#include "semflow/agent.hpp"
#include "semflow/error.hpp"
#include "semflow/overloaded.hpp"

namespace semflow {

json pipeline_state_to_json(const PipelineState& state) {
  json j;
  j["dataset_id"] = state.dataset_id ? json(*state.dataset_id) : json(nullptr);
  j["plan"] = state.plan ? plan_to_json(*state.plan) : json(nullptr);
  json schemas = json::object();
  for (const auto& [name, schema] : state.schemas) schemas[name] = schema_to_json(*schema);
  j["schemas"] = std::move(schemas);
  j["policy"] = state.policy ? policy_to_json(*state.policy) : json(nullptr);
  j["results_schema"] = state.results_schema ? schema_to_json(*state.results_schema) : json(nullptr);
  j["results"] = state.results ? records_to_json(*state.results) : json(nullptr);
  j["stats"] = state.stats ? stats_to_json(*state.stats) : json(nullptr);
  return j;
}

PipelineState pipeline_state_from_json(const json& j) {
  try {
    PipelineState state;
    if (j.contains("dataset_id") && !j["dataset_id"].is_null()) {
      state.dataset_id = j["dataset_id"].get<std::string>();
    }
    if (j.contains("plan") && !j["plan"].is_null()) state.plan = plan_from_full_json(j["plan"]);
    if (j.contains("schemas")) {
      for (const auto& [name, s] : j["schemas"].items()) state.schemas[name] = schema_from_json(s);
    }
    if (j.contains("policy") && !j["policy"].is_null()) state.policy = policy_from_json(j["policy"]);
    if (j.contains("results_schema") && !j["results_schema"].is_null()) {
      state.results_schema = schema_from_json(j["results_schema"]);
    }
    if (j.contains("results") && !j["results"].is_null()) {
      if (!state.results_schema) throw Error(ErrorCode::ParseError, "results without results_schema");
      std::vector<Record> records;
      for (const auto& r : j["results"]) records.push_back(record_from_json(r, state.results_schema));
      state.results = std::move(records);
    }
    if (j.contains("stats") && !j["stats"].is_null()) state.stats = stats_from_json(j["stats"]);
    return state;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed pipeline state: ") + e.what());
  }
}

std::string agent_prompt(const ToolRegistry& tools, const AgentSession& session) {
  std::string prompt = tools.system_preamble();
  prompt += "\n";
  for (const auto& step : session.transcript) {
    prompt += format_step(step);
    prompt += "\n";
  }
  return prompt;
}

namespace {

void append(AgentSession& session, AgentStep step, const AgentOptions& options) {
  session.transcript.push_back(std::move(step));
  if (options.on_step) options.on_step(session.transcript.back());
}

std::string invoke(const ToolSpec& spec, Action& action, AgentSession& session, ToolContext& ctx) {
  json bindings = action.args;
  for (const auto& arg : spec.args) {
    if (bindings.contains(arg.name)) continue;
    if (!arg.default_value) {
      throw Error(ErrorCode::InvalidArguments,
                  "tool " + spec.name + " requires argument '" + arg.name + "'");
    }
    bindings[arg.name] = *arg.default_value;
  }
  for (const auto& [name, value] : bindings.items()) {
    bool declared = false;
    for (const auto& arg : spec.args) declared = declared || arg.name == name;
    if (!declared) {
      throw Error(ErrorCode::InvalidArguments, "tool " + spec.name + " has no argument '" + name + "'");
    }
  }
  action.rendered = render_tool(spec, bindings);

  PipelineState scratch = session.state;
  std::string observation = spec.handler(scratch, bindings, ctx);
  session.state = std::move(scratch);
  return observation;
}

}  // namespace

void run_agent(const std::string& user_message, AgentSession& session, ModelProvider& llm,
               const ToolRegistry& tools, ToolContext& ctx, const AgentOptions& options) {
  append(session, UserMessage{user_message}, options);

  for (std::size_t step = 0; step < session.step_budget; ++step) {
    std::string reply;
    try {
      reply = llm.complete({options.model_id, agent_prompt(tools, session)}).text;
    } catch (const Error& e) {
      throw Error(ErrorCode::LLMUnavailable, e.what());
    }

    AgentStep parsed;
    try {
      parsed = parse_step(reply);
    } catch (const Error& e) {
      append(session,
             Observation{std::string("Error: ") + e.what() +
                         ". Reply with a Thought followed by either an Action and a one-line Action "
                         "Input, or a Final Answer."},
             options);
      continue;
    }

    if (std::holds_alternative<FinalAnswer>(parsed)) {
      append(session, std::move(parsed), options);
      return;
    }
    if (std::holds_alternative<Thought>(parsed)) {
      append(session, std::move(parsed), options);
      continue;
    }

    auto action = std::get<Action>(std::move(parsed));
    const ToolSpec* spec = tools.find(action.tool);
    std::string observation;
    if (spec == nullptr) {
      observation = "Error: UnknownTool: there is no tool named '" + action.tool + "'";
    } else {
      try {
        observation = invoke(*spec, action, session, ctx);
      } catch (const std::exception& e) {
        observation = std::string("Error: ") + e.what();
      }
    }
    append(session, std::move(action), options);
    append(session, Observation{std::move(observation)}, options);
  }

  std::ostringstream os;
  os << "Stopping: the step budget of " << session.step_budget
     << " steps was exhausted before the request was completed.";
  append(session, FinalAnswer{{}, os.str()}, options);
}

json pipeline_json(const LogicalPlan& plan, const std::optional<Policy>& policy) {
  json j;
  j["source"] = plan.source_id();
  j["ops"] = plan_ops_to_json(plan);
  if (policy) j["policy"] = policy_to_json(*policy);
  return j;
}

ExportBundle export_code(const PipelineState& state) {
  if (!state.plan || state.plan->empty()) {
    throw Error(ErrorCode::NoPipeline, "the session has no pipeline to export");
  }
  const LogicalPlan& plan = *state.plan;

  ExportBundle bundle;
  bundle.pipeline_file = pipeline_json(plan, state.policy).dump(2) + "\n";

  std::map<std::string, SchemaPtr> schemas = state.schemas;
  for (const auto& op : plan.ops()) {
    if (const auto* c = std::get_if<ConvertOp>(&op)) schemas.emplace(c->target->name(), c->target);
  }

  std::ostringstream os;
  os << "# dataset\n";
  os << "dataset = Dataset(source=" << json(plan.source_id()).dump() << ")\n";
  if (!schemas.empty()) {
    os << "\n# schemas\n";
    for (const auto& [name, schema] : schemas) {
      os << "class " << name << "(Schema):\n";
      os << "    " << json(schema->doc()).dump() << "\n";
      for (const auto& f : schema->fields()) {
        os << "    " << f.name << " = Field(kind=" << json(to_string(f.kind)).dump()
           << ", desc=" << json(f.description).dump() << ")\n";
      }
    }
  }
  os << "\n# operators\n";
  for (std::size_t i = 1; i < plan.size(); ++i) {
    std::visit(overloaded{[&](const ScanOp&) {},
                          [&](const FilterOp& f) {
                            if (f.is_udf()) {
                              os << "dataset = dataset.filter(udf=" << json(f.udf_name).dump() << ")\n";
                            } else {
                              os << "dataset = dataset.filter(" << json(f.predicate).dump() << ")\n";
                            }
                          },
                          [&](const ConvertOp& c) {
                            os << "dataset = dataset.convert(" << c.target->name()
                               << ", desc=" << json(c.desc).dump() << ", cardinality="
                               << json(to_string(c.cardinality)).dump() << ")\n";
                          },
                          [&](const AggregateOp& a) {
                            if (a.fn == AggregateFn::Count) {
                              os << "dataset = dataset.count()\n";
                            } else {
                              os << "dataset = dataset.average(" << json(a.field).dump() << ")\n";
                            }
                          },
                          [&](const LimitOp& l) { os << "dataset = dataset.limit(" << l.n << ")\n"; }},
               plan.ops()[i]);
  }
  os << "\n# policy\n";
  os << "policy = " << policy_to_json(state.policy.value_or(Policy{MaxQuality{}})).dump() << "\n";
  os << "\nrecords, execution_stats = execute(dataset, policy=policy)\n";
  bundle.script = os.str();
  return bundle;
}

}  // namespace semflow
