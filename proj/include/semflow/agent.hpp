#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semflow/catalog.hpp"
#include "semflow/dataset.hpp"
#include "semflow/executor.hpp"
#include "semflow/logical_plan.hpp"
#include "semflow/optimizer.hpp"
#include "semflow/provider.hpp"

namespace semflow {

// ---------------------------------------------------------------------------
// Transcript steps

struct UserMessage {
  std::string text;
  friend bool operator==(const UserMessage&, const UserMessage&) = default;
};
struct Thought {
  std::string text;
  friend bool operator==(const Thought&, const Thought&) = default;
};
struct Action {
  std::string thought;  // reasoning that preceded the action in the same reply
  std::string tool;
  json args = json::object();
  std::string rendered;  // tool body with arguments injected; display only
  friend bool operator==(const Action&, const Action&) = default;
};
struct Observation {
  std::string text;
  friend bool operator==(const Observation&, const Observation&) = default;
};
struct FinalAnswer {
  std::string thought;
  std::string text;
  friend bool operator==(const FinalAnswer&, const FinalAnswer&) = default;
};

using AgentStep = std::variant<UserMessage, Thought, Action, Observation, FinalAnswer>;

/// "user", "thought", "action", "observation" or "final_answer".
std::string_view step_kind(const AgentStep& step) noexcept;
json step_to_json(const AgentStep& step);
AgentStep step_from_json(const json& j);

/// Parses one model reply. Grammar (keys case-sensitive, at line start):
///   [Thought: <text>]
///   Action: <tool>            |  Final Answer: <text>
///   Action Input: <one-line JSON object>
/// A reply with only a Thought parses as Thought. Anything else throws
/// UnparseableStep.
AgentStep parse_step(std::string_view text);
/// Inverse of parse_step for Thought, Action and FinalAnswer; also renders
/// user and observation lines for the transcript part of the prompt.
std::string format_step(const AgentStep& step);

// ---------------------------------------------------------------------------
// Pipeline state built up by tools

struct PipelineState {
  std::optional<std::string> dataset_id;
  std::optional<LogicalPlan> plan;
  std::map<std::string, SchemaPtr> schemas;
  std::optional<Policy> policy;
  std::optional<std::vector<Record>> results;
  SchemaPtr results_schema;
  std::optional<ExecutionStats> stats;
};

json pipeline_state_to_json(const PipelineState& state);
PipelineState pipeline_state_from_json(const json& j);

// ---------------------------------------------------------------------------
// Tools

/// Engine handles a tool may use.
struct ToolContext {
  DatasetRegistry& datasets;
  ModelProvider& provider;
  const ModelCatalog& catalog;
  const UdfRegistry& udfs;
  CardinalityModel card;
  std::size_t workers = 1;
  /// Where `register_dataset` looks for `<dataset_id>/` when no path is given,
  /// and what relative paths are resolved against.
  std::filesystem::path dataset_root = ".";
};

struct ToolArg {
  std::string name;
  std::string type;  // semantic type shown to the model: str, list, number
  std::string description;
  std::optional<json> default_value;  // set for optional arguments
};

/// Returns the observation text. Throwing leaves the pipeline state untouched.
using ToolHandler = std::function<std::string(PipelineState& state, const json& args, ToolContext& ctx)>;

struct ToolSpec {
  std::string name;
  std::string summary;  // what the tool does and when to use it; one line
  std::vector<ToolArg> args;
  std::string body;  // template text with {{variable}} placeholders
  ToolHandler handler;
};

/// Names inside `{{ name }}` placeholders, in order of appearance.
std::vector<std::string> template_variables(std::string_view body);
/// Text substituted for a placeholder: strings JSON-quoted (braces escaped),
/// lists bracketed, numbers and booleans as JSON.
std::string canonical_text(const json& value);
/// Replaces every placeholder. Throws MissingBinding naming the first unbound
/// variable.
std::string render_tool(const ToolSpec& spec, const json& bindings);

class ToolRegistry {
 public:
  /// Throws DuplicateTool, UnboundTemplateVariable, or InvalidArguments.
  void register_tool(ToolSpec spec);
  [[nodiscard]] const ToolSpec* find(std::string_view name) const;
  [[nodiscard]] const std::vector<ToolSpec>& tools() const noexcept { return tools_; }

  /// Instructions plus one block per tool:
  ///   TOOL <name>\n<summary>\nARGS:\n<name> (<type>): <description>...
  [[nodiscard]] std::string system_preamble() const;

  /// register_dataset, create_schema, add_filter, add_convert, set_policy,
  /// execute_pipeline, get_stats, export_code.
  static ToolRegistry with_builtins();

 private:
  std::vector<ToolSpec> tools_;
};

// ---------------------------------------------------------------------------
// Sessions and the reasoning loop

inline constexpr std::size_t kDefaultStepBudget = 10;

struct AgentSession {
  std::string id;
  std::vector<AgentStep> transcript;
  PipelineState state;
  std::size_t step_budget = kDefaultStepBudget;  // model calls per user message
};

struct AgentOptions {
  std::string model_id = "agent";
  /// Called after each step is appended to the transcript.
  std::function<void(const AgentStep&)> on_step;
};

/// Full prompt sent to the reasoning model for the current transcript.
std::string agent_prompt(const ToolRegistry& tools, const AgentSession& session);

/// Appends the user message, then alternates model replies and tool calls
/// until a final answer or the step budget is spent. Throws LLMUnavailable
/// if the reasoning model fails; steps appended so far are kept.
void run_agent(const std::string& user_message, AgentSession& session, ModelProvider& llm,
               const ToolRegistry& tools, ToolContext& ctx, const AgentOptions& options = {});

struct ExportBundle {
  std::string pipeline_file;  // canonical pipeline JSON, as read by the CLI
  std::string script;         // human-readable listing of the same pipeline
};

/// Deterministic: identical state gives byte-identical output. Throws NoPipeline.
ExportBundle export_code(const PipelineState& state);
inline ExportBundle export_code(const AgentSession& session) { return export_code(session.state); }

/// Pipeline-file JSON {source, ops, policy?} for a plan.
json pipeline_json(const LogicalPlan& plan, const std::optional<Policy>& policy);

}  // namespace semflow
