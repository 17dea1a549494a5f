#include "semflow/logical_plan.hpp"

#include <cstdio>

#include "semflow/error.hpp"
#include "semflow/overloaded.hpp"

namespace semflow {

namespace {

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

bool has_aggregate(const LogicalPlan& plan) {
  for (const auto& op : plan.ops()) {
    if (std::holds_alternative<AggregateOp>(op)) return true;
  }
  return false;
}

void require_scan_head(const LogicalPlan& plan) {
  if (plan.empty() || !std::holds_alternative<ScanOp>(plan.ops().front())) {
    throw Error(ErrorCode::InvalidPlan, "plan does not start with a scan");
  }
}

LogicalPlan append(const LogicalPlan& plan, LogicalOperator op) {
  auto ops = plan.ops();
  ops.push_back(std::move(op));
  return LogicalPlan(std::move(ops));
}

}  // namespace

std::string_view to_string(Cardinality c) noexcept {
  return c == Cardinality::OneToMany ? "one_to_many" : "one_to_one";
}

Cardinality cardinality_from_string(std::string_view text) {
  if (text == "one_to_one") return Cardinality::OneToOne;
  if (text == "one_to_many") return Cardinality::OneToMany;
  throw Error(ErrorCode::ParseError, "unknown cardinality '" + std::string(text) + "'");
}

std::string_view op_type(const LogicalOperator& op) noexcept {
  return std::visit(overloaded{[](const ScanOp&) { return "scan"; },
                               [](const FilterOp&) { return "filter"; },
                               [](const ConvertOp&) { return "convert"; },
                               [](const AggregateOp&) { return "aggregate"; },
                               [](const LimitOp&) { return "limit"; }},
                    op);
}

json op_to_json(const LogicalOperator& op) {
  return std::visit(
      overloaded{
          [](const ScanOp& s) -> json {
            return {{"type", "scan"},
                    {"source", s.source_id},
                    {"schema", s.schema ? schema_to_json(*s.schema) : json(nullptr)}};
          },
          [](const FilterOp& f) -> json {
            if (f.is_udf()) return {{"type", "filter"}, {"udf", f.udf_name}};
            return {{"type", "filter"}, {"predicate", f.predicate}};
          },
          [](const ConvertOp& c) -> json {
            return {{"type", "convert"},
                    {"schema", schema_to_json(*c.target)},
                    {"cardinality", to_string(c.cardinality)},
                    {"desc", c.desc}};
          },
          [](const AggregateOp& a) -> json {
            if (a.fn == AggregateFn::Count) return {{"type", "aggregate"}, {"fn", "count"}};
            return {{"type", "aggregate"}, {"fn", "average"}, {"field", a.field}};
          },
          [](const LimitOp& l) -> json { return {{"type", "limit"}, {"n", l.n}}; }},
      op);
}

LogicalPlan::LogicalPlan() : LogicalPlan(std::vector<LogicalOperator>{}) {}

LogicalPlan::LogicalPlan(std::vector<LogicalOperator> ops) : ops_(std::move(ops)) {
  json canonical = json::array();
  for (const auto& op : ops_) canonical.push_back(op_to_json(op));
  id_ = fnv1a_hex(canonical.dump());
}

const std::string& LogicalPlan::source_id() const {
  require_scan_head(*this);
  return std::get<ScanOp>(ops_.front()).source_id;
}

LogicalPlan plan_scan(const DataSource& source) {
  return LogicalPlan({ScanOp{source.id, source.detected_schema}});
}

LogicalPlan plan_scan(const DatasetRegistry& registry, const std::string& source_id) {
  return plan_scan(registry.get(source_id));
}

LogicalPlan plan_filter(const LogicalPlan& plan, const std::string& predicate) {
  if (blank(predicate)) throw Error(ErrorCode::EmptyPredicate, "filter predicate is empty");
  require_scan_head(plan);
  if (has_aggregate(plan)) throw Error(ErrorCode::AfterAggregate, "cannot filter after an aggregate");
  return append(plan, FilterOp{predicate, {}});
}

LogicalPlan plan_filter_udf(const LogicalPlan& plan, const std::string& udf_name) {
  if (blank(udf_name)) throw Error(ErrorCode::EmptyPredicate, "filter UDF name is empty");
  require_scan_head(plan);
  if (has_aggregate(plan)) throw Error(ErrorCode::AfterAggregate, "cannot filter after an aggregate");
  return append(plan, FilterOp{{}, udf_name});
}

LogicalPlan plan_convert(const LogicalPlan& plan, SchemaPtr target, Cardinality cardinality,
                         const std::string& desc) {
  if (!target) throw Error(ErrorCode::InvalidPlan, "convert target schema is missing");
  require_scan_head(plan);
  if (has_aggregate(plan)) throw Error(ErrorCode::AfterAggregate, "cannot convert after an aggregate");
  bool identity = same_schema(output_schema(plan), target);
  return append(plan, ConvertOp{std::move(target), cardinality, desc, identity});
}

LogicalPlan plan_aggregate(const LogicalPlan& plan, AggregateFn fn, const std::string& field) {
  require_scan_head(plan);
  if (has_aggregate(plan)) throw Error(ErrorCode::AfterAggregate, "plan is already aggregated");
  if (fn == AggregateFn::Average) {
    auto schema = output_schema(plan);
    auto idx = schema->index_of(field);
    if (!idx) {
      throw Error(ErrorCode::UnknownField,
                  "schema " + schema->name() + " has no field '" + field + "'");
    }
    if (schema->fields()[*idx].kind != FieldKind::Number) {
      throw Error(ErrorCode::WrongKind, "cannot average non-number field '" + field + "'");
    }
  }
  return append(plan, AggregateOp{fn, fn == AggregateFn::Average ? field : std::string()});
}

LogicalPlan plan_limit(const LogicalPlan& plan, std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::NonPositiveLimit, "limit must be at least 1");
  require_scan_head(plan);
  return append(plan, LimitOp{n});
}

LogicalPlan without_last(const LogicalPlan& plan) {
  auto ops = plan.ops();
  if (!ops.empty()) ops.pop_back();
  return LogicalPlan(std::move(ops));
}

std::vector<SchemaPtr> input_schemas(const LogicalPlan& plan) {
  std::vector<SchemaPtr> inputs;
  SchemaPtr current;
  for (const auto& op : plan.ops()) {
    inputs.push_back(current);
    std::visit(overloaded{[&](const ScanOp& s) { current = s.schema; },
                          [&](const FilterOp&) {},
                          [&](const ConvertOp& c) { current = c.target; },
                          [&](const AggregateOp&) { current = aggregate_schema(); },
                          [&](const LimitOp&) {}},
               op);
  }
  inputs.push_back(current);
  return inputs;
}

SchemaPtr output_schema(const LogicalPlan& plan) { return input_schemas(plan).back(); }

std::vector<std::string> validate_plan(const LogicalPlan& plan) {
  std::vector<std::string> diags;
  if (plan.empty()) {
    diags.emplace_back("no dataset");
    return diags;
  }
  auto inputs = input_schemas(plan);
  bool aggregated = false;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& op = plan.ops()[i];
    const std::string at = "op " + std::to_string(i) + ": ";
    bool is_scan = std::holds_alternative<ScanOp>(op);
    if (i == 0 && !is_scan) diags.push_back(at + "plan must begin with a scan");
    if (i > 0 && is_scan) diags.push_back(at + "only the first operator may be a scan");
    if (aggregated && !std::holds_alternative<LimitOp>(op)) {
      diags.push_back(at + std::string(op_type(op)) + " cannot follow an aggregate");
    }
    std::visit(
        overloaded{
            [&](const ScanOp& s) {
              if (s.source_id.empty()) diags.push_back(at + "scan has no source");
              if (!s.schema) diags.push_back(at + "scan has no schema");
            },
            [&](const FilterOp& f) {
              bool has_pred = !blank(f.predicate);
              if (has_pred == f.is_udf()) {
                diags.push_back(at + "filter needs exactly one of a predicate or a UDF name");
              }
            },
            [&](const ConvertOp& c) {
              if (!c.target) {
                diags.push_back(at + "convert has no target schema");
              } else if (inputs[i] && c.identity != same_schema(inputs[i], c.target)) {
                diags.push_back(at + "convert identity flag does not match its input schema");
              }
            },
            [&](const AggregateOp& a) {
              aggregated = true;
              if (a.fn != AggregateFn::Average || !inputs[i]) return;
              auto idx = inputs[i]->index_of(a.field);
              if (!idx) {
                diags.push_back(at + "average over unknown field '" + a.field + "'");
              } else if (inputs[i]->fields()[*idx].kind != FieldKind::Number) {
                diags.push_back(at + "average over non-number field '" + a.field + "'");
              }
            },
            [&](const LimitOp& l) {
              if (l.n < 1) diags.push_back(at + "limit must be at least 1");
            }},
        op);
  }
  return diags;
}

json plan_ops_to_json(const LogicalPlan& plan) {
  json out = json::array();
  for (const auto& op : plan.ops()) {
    if (std::holds_alternative<ScanOp>(op)) continue;
    out.push_back(op_to_json(op));
  }
  return out;
}

LogicalPlan plan_from_json(const DataSource& source, const json& ops) {
  if (!ops.is_array()) throw Error(ErrorCode::ParseError, "pipeline ops must be an array");
  std::vector<LogicalOperator> out{ScanOp{source.id, source.detected_schema}};
  SchemaPtr current = source.detected_schema;
  try {
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const auto& j = ops[i];
      const std::string type = j.at("type").get<std::string>();
      if (type == "filter") {
        out.push_back(FilterOp{j.value("predicate", std::string()), j.value("udf", std::string())});
      } else if (type == "convert") {
        auto target = schema_from_json(j.at("schema"));
        auto card = cardinality_from_string(j.value("cardinality", std::string("one_to_one")));
        bool identity = same_schema(current, target);
        out.push_back(ConvertOp{target, card, j.value("desc", target->doc()), identity});
        current = target;
      } else if (type == "aggregate") {
        std::string fn = j.at("fn").get<std::string>();
        if (fn == "count") {
          out.push_back(AggregateOp{AggregateFn::Count, {}});
        } else if (fn == "average") {
          out.push_back(AggregateOp{AggregateFn::Average, j.at("field").get<std::string>()});
        } else {
          throw Error(ErrorCode::ParseError, "op " + std::to_string(i + 1) +
                                                 ": unknown aggregate fn '" + fn + "'");
        }
        current = aggregate_schema();
      } else if (type == "limit") {
        out.push_back(LimitOp{j.at("n").get<std::int64_t>()});
      } else {
        throw Error(ErrorCode::ParseError,
                    "op " + std::to_string(i + 1) + ": unknown operator type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed pipeline op: ") + e.what());
  }
  return LogicalPlan(std::move(out));
}

json plan_to_json(const LogicalPlan& plan) {
  json out = json::array();
  for (const auto& op : plan.ops()) out.push_back(op_to_json(op));
  return out;
}

LogicalPlan plan_from_full_json(const json& ops) {
  if (!ops.is_array() || ops.empty()) return LogicalPlan();
  try {
    const auto& head = ops.at(0);
    if (head.at("type").get<std::string>() != "scan") {
      throw Error(ErrorCode::ParseError, "serialized plan does not start with a scan");
    }
    DataSource src;
    src.id = head.at("source").get<std::string>();
    src.detected_schema = schema_from_json(head.at("schema"));
    return plan_from_json(src, json(std::vector<json>(ops.begin() + 1, ops.end())));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed plan: ") + e.what());
  }
}

LogicalPlan plan_from_json(const std::string& source_id, const json& ops,
                           const DatasetRegistry& registry) {
  return plan_from_json(registry.get(source_id), ops);
}

}  // namespace semflow
