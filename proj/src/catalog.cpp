#include "semflow/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "semflow/error.hpp"
#include "semflow/overloaded.hpp"

namespace semflow {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

ModelCatalog::ModelCatalog(std::vector<ModelProfile> models) : models_(std::move(models)) {
  for (const auto& m : models_) {
    if (m.id.empty()) throw Error(ErrorCode::InvalidCatalog, "model with empty id");
    if (!finite_nonneg(m.usd_per_call) || !finite_nonneg(m.seconds_per_call)) {
      throw Error(ErrorCode::InvalidCatalog, "model " + m.id + " has a negative or non-finite rate");
    }
    if (!(m.quality > 0.0 && m.quality <= 1.0)) {
      throw Error(ErrorCode::InvalidCatalog, "model " + m.id + " quality must be in (0, 1]");
    }
    for (const auto& tok : {m.usd_per_input_token, m.usd_per_output_token}) {
      if (tok && !finite_nonneg(*tok)) {
        throw Error(ErrorCode::InvalidCatalog, "model " + m.id + " has an invalid token price");
      }
    }
  }
  std::sort(models_.begin(), models_.end(),
            [](const ModelProfile& a, const ModelProfile& b) { return a.id < b.id; });
  auto dup = std::adjacent_find(models_.begin(), models_.end(),
                                [](const ModelProfile& a, const ModelProfile& b) { return a.id == b.id; });
  if (dup != models_.end()) throw Error(ErrorCode::InvalidCatalog, "duplicate model id " + dup->id);
}

const ModelProfile* ModelCatalog::find(const std::string& id) const noexcept {
  auto it = std::lower_bound(models_.begin(), models_.end(), id,
                             [](const ModelProfile& m, const std::string& key) { return m.id < key; });
  if (it == models_.end() || it->id != id) return nullptr;
  return &*it;
}

const ModelProfile& ModelCatalog::get(const std::string& id) const {
  if (const auto* m = find(id)) return *m;
  throw Error(ErrorCode::UnknownModel, "model '" + id + "' is not in the catalog");
}

ModelCatalog ModelCatalog::from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidCatalog, "model catalog must be a JSON array");
  std::vector<ModelProfile> models;
  try {
    for (const auto& m : j) {
      ModelProfile p;
      p.id = m.at("id").get<std::string>();
      p.usd_per_call = m.at("usd_per_call").get<double>();
      p.seconds_per_call = m.at("seconds_per_call").get<double>();
      p.quality = m.at("quality").get<double>();
      if (m.contains("usd_per_input_token")) p.usd_per_input_token = m.at("usd_per_input_token").get<double>();
      if (m.contains("usd_per_output_token")) p.usd_per_output_token = m.at("usd_per_output_token").get<double>();
      models.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidCatalog, std::string("malformed catalog entry: ") + e.what());
  }
  return ModelCatalog(std::move(models));
}

ModelCatalog ModelCatalog::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read catalog " + file.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
}

json ModelCatalog::to_json() const {
  json out = json::array();
  for (const auto& m : models_) {
    json e = {{"id", m.id},
              {"usd_per_call", m.usd_per_call},
              {"seconds_per_call", m.seconds_per_call},
              {"quality", m.quality}};
    if (m.usd_per_input_token) e["usd_per_input_token"] = *m.usd_per_input_token;
    if (m.usd_per_output_token) e["usd_per_output_token"] = *m.usd_per_output_token;
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------

void UdfRegistry::add(const std::string& name, UdfFunction fn) { fns_[name] = std::move(fn); }

bool UdfRegistry::contains(const std::string& name) const { return fns_.count(name) > 0; }

const UdfFunction& UdfRegistry::get(const std::string& name) const {
  auto it = fns_.find(name);
  if (it == fns_.end()) throw Error(ErrorCode::UnknownUDF, "no UDF registered as '" + name + "'");
  return it->second;
}

std::vector<std::string> UdfRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : fns_) out.push_back(name);
  return out;
}

UdfRegistry UdfRegistry::with_builtins() {
  UdfRegistry reg;
  reg.add("has_contents", [](const Record& r) {
    if (!r.schema->has_field("contents")) return false;
    const auto* s = std::get_if<std::string>(&r.get("contents"));
    return s != nullptr && !s->empty();
  });
  return reg;
}

// ---------------------------------------------------------------------------

std::string PhysicalOperator::descriptor() const {
  switch (impl) {
    case ImplKind::DirectScan: return "DirectScan";
    case ImplKind::LLMFilter: return "LLMFilter(" + model_id + ")";
    case ImplKind::UDFFilter: return "UDFFilter(" + udf_name + ")";
    case ImplKind::LLMConvert: return "LLMConvert(" + model_id + ")";
    case ImplKind::IdentityConvert: return "IdentityConvert";
    case ImplKind::ExactAggregate: return "ExactAggregate";
    case ImplKind::PassLimit: return "PassLimit";
  }
  return "?";
}

std::string PhysicalPlan::key() const {
  std::string out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i > 0) out += " > ";
    out += ops[i].descriptor();
  }
  return out;
}

json physical_plan_to_json(const PhysicalPlan& plan) {
  json ops = json::array();
  for (const auto& op : plan.ops) ops.push_back(op.descriptor());
  return {{"logical_id", plan.logical_id},
          {"key", plan.key()},
          {"ops", std::move(ops)},
          {"estimate",
           {{"cost_usd", plan.estimate.cost_usd},
            {"time_s", plan.estimate.time_s},
            {"quality", plan.estimate.quality}}}};
}

// ---------------------------------------------------------------------------

void CardinalityModel::validate() const {
  if (!finite_nonneg(input_count)) throw Error(ErrorCode::InvalidPlan, "input_count must be >= 0");
  if (!(filter_selectivity >= 0.0 && filter_selectivity <= 1.0)) {
    throw Error(ErrorCode::InvalidPlan, "filter_selectivity must be in [0, 1]");
  }
  if (!finite_nonneg(one_to_one_fanout) || !finite_nonneg(one_to_many_fanout)) {
    throw Error(ErrorCode::InvalidPlan, "convert fanout must be >= 0");
  }
}

void CardinalityModel::apply_overrides(const json& overrides) {
  if (overrides.is_null()) return;
  try {
    if (overrides.contains("input_count")) input_count = overrides.at("input_count").get<double>();
    if (overrides.contains("filter_selectivity")) {
      filter_selectivity = overrides.at("filter_selectivity").get<double>();
    }
    if (overrides.contains("convert_fanout")) {
      one_to_many_fanout = overrides.at("convert_fanout").get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed cardinality overrides: ") + e.what());
  }
  validate();
}

json CardinalityModel::to_json() const {
  return {{"input_count", input_count},
          {"filter_selectivity", filter_selectivity},
          {"convert_fanout", one_to_many_fanout}};
}

std::vector<double> estimated_flow(const LogicalPlan& logical, const CardinalityModel& card) {
  std::vector<double> flow;
  flow.reserve(logical.size() + 1);
  double n = card.input_count;
  for (const auto& op : logical.ops()) {
    flow.push_back(n);
    std::visit(overloaded{[&](const ScanOp&) {},
                          [&](const FilterOp&) { n *= card.filter_selectivity; },
                          [&](const ConvertOp& c) {
                            if (c.identity) return;
                            n *= c.cardinality == Cardinality::OneToMany ? card.one_to_many_fanout
                                                                         : card.one_to_one_fanout;
                          },
                          [&](const AggregateOp&) { n = 1.0; },
                          [&](const LimitOp& l) { n = std::min(n, static_cast<double>(l.n)); }},
               op);
  }
  flow.push_back(n);
  return flow;
}

PlanEstimate estimate_plan(const PhysicalPlan& plan, const CardinalityModel& card,
                           const ModelCatalog& catalog) {
  if (!plan.logical) throw Error(ErrorCode::InvalidPlan, "physical plan has no logical plan");
  auto flow = estimated_flow(*plan.logical, card);
  PlanEstimate est;
  for (const auto& op : plan.ops) {
    double n = flow.at(op.logical_ref);
    if (op.uses_model()) {
      const auto& model = catalog.get(op.model_id);
      est.cost_usd += n * model.usd_per_call;
      est.time_s += n * model.seconds_per_call;
      est.quality *= model.quality;
    } else {
      est.time_s += n * kNonModelSecondsPerRecord;
    }
  }
  return est;
}

std::vector<PhysicalOperator> implementations(const LogicalPlan& logical, std::size_t index,
                                              const ModelCatalog& catalog, const UdfRegistry& udfs) {
  std::vector<PhysicalOperator> out;
  auto per_model = [&](ImplKind kind) {
    for (const auto& m : catalog.models()) out.push_back({index, kind, m.id, {}});
  };
  std::visit(overloaded{[&](const ScanOp&) { out.push_back({index, ImplKind::DirectScan, {}, {}}); },
                        [&](const FilterOp& f) {
                          if (!f.is_udf()) return per_model(ImplKind::LLMFilter);
                          if (!udfs.contains(f.udf_name)) {
                            throw Error(ErrorCode::UnknownUDF,
                                        "no UDF registered as '" + f.udf_name + "'");
                          }
                          out.push_back({index, ImplKind::UDFFilter, {}, f.udf_name});
                        },
                        [&](const ConvertOp& c) {
                          if (c.identity) {
                            out.push_back({index, ImplKind::IdentityConvert, {}, {}});
                          } else {
                            per_model(ImplKind::LLMConvert);
                          }
                        },
                        [&](const AggregateOp&) {
                          out.push_back({index, ImplKind::ExactAggregate, {}, {}});
                        },
                        [&](const LimitOp&) { out.push_back({index, ImplKind::PassLimit, {}, {}}); }},
             logical.ops().at(index));
  return out;
}

std::vector<PhysicalPlan> enumerate_physical_plans(const LogicalPlan& logical,
                                                   const ModelCatalog& catalog,
                                                   const UdfRegistry& udfs,
                                                   const CardinalityModel& card) {
  auto diags = validate_plan(logical);
  if (!diags.empty()) throw Error(ErrorCode::InvalidPlan, diags.front());
  if (catalog.empty()) throw Error(ErrorCode::InvalidCatalog, "model catalog is empty");
  card.validate();

  std::vector<std::vector<PhysicalOperator>> choices;
  for (std::size_t i = 0; i < logical.size(); ++i) {
    choices.push_back(implementations(logical, i, catalog, udfs));
  }

  auto shared = std::make_shared<const LogicalPlan>(logical);
  std::vector<PhysicalPlan> plans;
  // Odometer over the choice lists; the last operator varies fastest.
  std::vector<std::size_t> pick(choices.size(), 0);
  while (true) {
    PhysicalPlan plan;
    plan.logical_id = logical.id();
    plan.logical = shared;
    for (std::size_t i = 0; i < choices.size(); ++i) plan.ops.push_back(choices[i][pick[i]]);
    plan.estimate = estimate_plan(plan, card, catalog);
    plans.push_back(std::move(plan));

    std::size_t pos = choices.size();
    while (pos > 0) {
      --pos;
      if (++pick[pos] < choices[pos].size()) break;
      pick[pos] = 0;
      if (pos == 0) return plans;
    }
    if (choices.empty()) return plans;
  }
}

}  // namespace semflow
