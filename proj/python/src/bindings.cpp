#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semflow/agent.hpp"
#include "semflow/cli.hpp"
#include "semflow/error.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace semflow;

namespace {

struct Loaded {
  DatasetRegistry datasets;
  LogicalPlan plan;
  Policy policy;
  ModelCatalog catalog;
  CardinalityModel card;
};

void load_pipeline(Loaded& out, const std::string& pipeline, const std::string& catalog,
                   const std::string& data_root, const std::optional<std::string>& policy_json) {
  PipelineFile file = PipelineFile::load(pipeline);
  out.policy = file.policy.value_or(Policy{MaxQuality{}});
  if (policy_json) out.policy = policy_from_json(json::parse(*policy_json));
  out.catalog = ModelCatalog::load(catalog.empty() ? file.catalog_path : fs::path(catalog));
  out.datasets.register_dataset(file.source, fs::path(data_root) / file.source);
  out.plan = plan_from_json(out.datasets.get(file.source), file.ops);
  if (auto diags = validate_plan(out.plan); !diags.empty()) throw Error(ErrorCode::InvalidPlan, diags.front());
  out.card.apply_overrides(file.cardinality_overrides);
}

py::tuple run_pipeline(const std::string& pipeline, const std::string& catalog, const std::string& mock_rules,
                       const std::string& data_root, const std::optional<std::string>& policy_json,
                       std::size_t workers) {
  Loaded l;
  load_pipeline(l, pipeline, catalog, data_root, policy_json);
  MockProvider mock(MockProvider::load(mock_rules).rules());
  UdfRegistry udfs = UdfRegistry::with_builtins();
  ExecutionResult result;
  {
    py::gil_scoped_release release;
    ExecutionContext ctx{l.datasets, mock, l.catalog, udfs, l.card, workers};
    result = execute(l.plan, l.policy, ctx);
  }
  return py::make_tuple(records_file_text(result.records), stats_file_text(result.stats));
}

std::string plans(const std::string& pipeline, const std::string& catalog, const std::string& data_root,
                  const std::optional<std::string>& policy_json) {
  Loaded l;
  load_pipeline(l, pipeline, catalog, data_root, policy_json);
  if (l.card.input_count <= 0.0) {
    l.card.input_count = static_cast<double>(scan(l.datasets.get(l.plan.source_id())).size());
  }
  auto choice = choose_plan(l.plan, l.policy, l.catalog, UdfRegistry::with_builtins(), l.card);
  json out = json::array();
  for (const auto& p : choice.plans) {
    bool pareto = false;
    for (const auto& f : choice.frontier) pareto = pareto || f.key() == p.key();
    out.push_back({{"plan", p.key()},
                   {"cost_usd", p.estimate.cost_usd},
                   {"time_s", p.estimate.time_s},
                   {"quality", p.estimate.quality},
                   {"pareto", pareto},
                   {"chosen", p.key() == choice.chosen.key()}});
  }
  return out.dump();
}

/// A chat session driven by a scripted reasoning model, with mock model
/// calls for pipeline execution.
class ScriptedAgent {
 public:
  ScriptedAgent(const std::string& dataset_root, const std::string& catalog, const std::string& mock_rules,
                std::vector<std::string> script)
      : mock_(MockProvider::load(mock_rules).rules()),
        catalog_(ModelCatalog::load(catalog)),
        udfs_(UdfRegistry::with_builtins()),
        tools_(ToolRegistry::with_builtins()),
        llm_(std::move(script)),
        ctx_{datasets_, mock_, catalog_, udfs_, {}, 1, dataset_root} {}

  std::string send(const std::string& message) {
    const std::size_t before = session_.transcript.size();
    {
      py::gil_scoped_release release;
      run_agent(message, session_, llm_, tools_, ctx_);
    }
    json steps = json::array();
    for (std::size_t i = before; i < session_.transcript.size(); ++i) {
      steps.push_back(step_to_json(session_.transcript[i]));
    }
    return steps.dump();
  }

  std::string state() const { return pipeline_state_to_json(session_.state).dump(); }

  py::tuple export_bundle() const {
    auto bundle = export_code(session_);
    return py::make_tuple(bundle.pipeline_file, bundle.script);
  }

 private:
  DatasetRegistry datasets_;
  MockProvider mock_;
  ModelCatalog catalog_;
  UdfRegistry udfs_;
  ToolRegistry tools_;
  ScriptedProvider llm_;
  ToolContext ctx_;
  AgentSession session_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of semflow";

  static py::exception<Error> error_type(m, "SemflowError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def("run_pipeline", &run_pipeline, py::arg("pipeline"), py::arg("catalog"), py::arg("mock_rules"),
        py::arg("data_root") = ".", py::arg("policy") = std::nullopt, py::arg("workers") = 1,
        "Execute a pipeline file with the mock provider. Returns (records_json, stats_json).");
  m.def("plans", &plans, py::arg("pipeline"), py::arg("catalog"), py::arg("data_root") = ".",
        py::arg("policy") = std::nullopt, "Enumerated physical plans with estimates, as JSON.");
  m.def("parse_step", [](const std::string& text) { return step_to_json(parse_step(text)).dump(); });
  m.def("format_step", [](const std::string& step_json) { return format_step(step_from_json(json::parse(step_json))); });
  m.def("select_plan", [](const std::string& estimates_json, const std::string& policy_json) {
    std::vector<PhysicalPlan> candidates;
    for (const auto& e : json::parse(estimates_json)) {
      PhysicalPlan p;
      p.ops = {PhysicalOperator{0, ImplKind::LLMFilter, e.at("name").get<std::string>(), {}}};
      p.estimate = {e.at("cost_usd").get<double>(), e.at("time_s").get<double>(), e.at("quality").get<double>()};
      candidates.push_back(std::move(p));
    }
    auto chosen = select_plan(candidates, policy_from_json(json::parse(policy_json)));
    return chosen.ops.front().model_id;
  });

  py::class_<ScriptedAgent>(m, "ScriptedAgent")
      .def(py::init<const std::string&, const std::string&, const std::string&, std::vector<std::string>>(),
           py::arg("dataset_root"), py::arg("catalog"), py::arg("mock_rules"), py::arg("script"))
      .def("send", &ScriptedAgent::send)
      .def("state", &ScriptedAgent::state)
      .def("export_bundle", &ScriptedAgent::export_bundle);
}
