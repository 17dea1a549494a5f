#include "semflow/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "semflow/error.hpp"

namespace semflow {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

void write_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to " + file.string() + " failed");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoFeasiblePlan: return kExitNoFeasiblePlan;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::LLMUnavailable: return kExitProvider;
    default: return kExitValidation;
  }
}

std::string number(double v) { return json(v).dump(); }

}  // namespace

PipelineFile PipelineFile::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "pipeline file must be a JSON object");
  try {
    PipelineFile f;
    f.source = j.at("source").get<std::string>();
    f.ops = j.value("ops", json::array());
    if (!f.ops.is_array()) throw Error(ErrorCode::ParseError, "'ops' must be a list");
    if (j.contains("policy") && !j["policy"].is_null()) f.policy = policy_from_json(j["policy"]);
    if (j.contains("cardinality_overrides")) f.cardinality_overrides = j["cardinality_overrides"];
    f.catalog_path = resolve(base_dir, j.value("catalog_path", std::string()));
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      f.provider_mode = p.value("mode", f.provider_mode);
      f.rules_path = resolve(base_dir, p.value("rules_path", std::string()));
      if (f.provider_mode == "real") f.real_provider = HttpProviderConfig::from_json(p);
      if (f.provider_mode != "mock" && f.provider_mode != "real") {
        throw Error(ErrorCode::ParseError, "provider.mode must be mock or real");
      }
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed pipeline file: ") + e.what());
  }
}

PipelineFile PipelineFile::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, file.string() + ": invalid JSON");
  return from_json(j, file.parent_path());
}

std::string records_file_text(const std::vector<Record>& records) {
  return records_to_json(records).dump(2) + "\n";
}

std::string stats_file_text(const ExecutionStats& stats) { return stats_to_json(stats).dump(2) + "\n"; }

std::string explain_table(const PlanChoice& choice, const Policy& policy, const CardinalityModel& card) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"#", "plan", "cost_usd", "time_s", "quality", "pareto", "chosen"});
  for (std::size_t i = 0; i < choice.plans.size(); ++i) {
    const auto& p = choice.plans[i];
    bool on_frontier = false;
    for (const auto& f : choice.frontier) on_frontier = on_frontier || f.key() == p.key();
    rows.push_back({std::to_string(i), p.key(), number(p.estimate.cost_usd), number(p.estimate.time_s),
                    number(p.estimate.quality), on_frontier ? "yes" : "no",
                    p.key() == choice.chosen.key() ? "*" : ""});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }

  std::ostringstream os;
  os << "policy: " << describe(policy) << "\n";
  os << "input records: " << number(card.input_count) << ", filter selectivity: "
     << number(card.filter_selectivity) << ", one-to-many fanout: " << number(card.one_to_many_fanout)
     << "\n";
  os << "plans: " << choice.plans.size() << ", pareto frontier: " << choice.frontier.size() << "\n\n";
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (c + 1 < row.size()) cell.resize(width[c], ' ');
      line += cell;
      if (c + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << "\n";
  }
  os << "\nchosen: " << choice.chosen.key() << "\n";
  return os.str();
}

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    PipelineFile file = PipelineFile::load(options.pipeline);

    Policy policy = file.policy.value_or(Policy{MaxQuality{}});
    if (options.policy_json) {
      json j = json::parse(*options.policy_json, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::InvalidPolicy, "--policy is not valid JSON");
      policy = policy_from_json(j);
    }

    fs::path catalog_path = options.catalog.empty() ? file.catalog_path : options.catalog;
    if (catalog_path.empty()) {
      throw Error(ErrorCode::InvalidCatalog, "no model catalog: pass --catalog or set catalog_path");
    }
    ModelCatalog catalog = ModelCatalog::load(catalog_path);

    DatasetRegistry datasets;
    if (!options.datasets.empty()) datasets.load(options.datasets);
    if (!datasets.find(file.source)) datasets.register_dataset(file.source, options.data_root / file.source);
    const DataSource source = datasets.get(file.source);

    LogicalPlan plan = plan_from_json(source, file.ops);
    if (auto diags = validate_plan(plan); !diags.empty()) {
      for (const auto& d : diags) err << "invalid pipeline: " << d << "\n";
      return kExitValidation;
    }

    CardinalityModel card;
    card.apply_overrides(file.cardinality_overrides);
    UdfRegistry udfs = UdfRegistry::with_builtins();

    if (options.explain) {
      CardinalityModel explain_card = card;
      if (explain_card.input_count <= 0.0) {
        explain_card.input_count = static_cast<double>(scan(source, *datasets.extractor()).size());
      }
      auto choice = choose_plan(plan, policy, catalog, udfs, explain_card);
      out << explain_table(choice, policy, explain_card);
      return kExitOk;
    }

    std::unique_ptr<ModelProvider> provider;
    fs::path rules = options.mock_rules.empty() ? file.rules_path : options.mock_rules;
    if (!options.mock_rules.empty() || file.provider_mode == "mock") {
      if (rules.empty()) throw Error(ErrorCode::InvalidMockRules, "mock mode needs --mock-rules or provider.rules_path");
      provider = std::make_unique<MockProvider>(MockProvider::load(rules).rules());
    } else {
      provider = std::make_unique<HttpProvider>(*file.real_provider);
    }

    ExecutionContext ctx{datasets, *provider, catalog, udfs, card, options.workers};
    auto result = execute(plan, policy, ctx);

    if (options.out.empty()) {
      out << records_file_text(result.records);
    } else {
      write_file(options.out, records_file_text(result.records));
    }
    if (!options.stats_out.empty()) write_file(options.stats_out, stats_file_text(result.stats));
    return kExitOk;
  } catch (const ExecutionError& e) {
    err << "execution failed: " << e.what() << "\n";
    if (!options.stats_out.empty()) {
      try {
        write_file(options.stats_out, stats_file_text(e.partial_stats()));
      } catch (const Error&) {
      }
    }
    return exit_code_for(e.code());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace semflow
