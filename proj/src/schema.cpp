#include "semflow/schema.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <set>

#include "semflow/error.hpp"

namespace semflow {

std::string_view to_string(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::Text: return "text";
    case FieldKind::Number: return "number";
    case FieldKind::Boolean: return "boolean";
    case FieldKind::TextList: return "list_of_text";
  }
  return "text";
}

FieldKind field_kind_from_string(std::string_view text) {
  if (text == "text") return FieldKind::Text;
  if (text == "number") return FieldKind::Number;
  if (text == "boolean") return FieldKind::Boolean;
  if (text == "list_of_text") return FieldKind::TextList;
  throw Error(ErrorCode::ParseError, "unknown field kind '" + std::string(text) + "'");
}

bool validate_field_name(std::string_view name) noexcept {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin(), name.end(), [&](char c) { return alpha(c) || digit(c); });
}

Schema::Schema(std::string name, std::string doc, std::vector<FieldSpec> fields)
    : name_(std::move(name)), doc_(std::move(doc)), fields_(std::move(fields)) {}

std::optional<std::size_t> Schema::index_of(std::string_view field) const noexcept {
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == field) return i;
  }
  return std::nullopt;
}

bool same_schema(const SchemaPtr& a, const SchemaPtr& b) noexcept {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

SchemaPtr make_schema(const std::string& name, const std::string& doc,
                      std::vector<FieldSpec> fields) {
  if (!validate_field_name(name)) {
    throw Error(ErrorCode::InvalidSchemaName, "schema name '" + name + "' is not an identifier");
  }
  if (fields.empty()) throw Error(ErrorCode::EmptyFields, "schema '" + name + "' has no fields");
  std::set<std::string> seen;
  for (const auto& f : fields) {
    if (!validate_field_name(f.name)) {
      throw Error(ErrorCode::InvalidFieldName,
                  "field name '" + f.name + "' may only contain letters, digits and underscores");
    }
    if (f.description.empty()) {
      throw Error(ErrorCode::EmptyDescription, "field '" + f.name + "' has no description");
    }
    if (!seen.insert(f.name).second) {
      throw Error(ErrorCode::DuplicateField, "field '" + f.name + "' appears more than once");
    }
  }
  return std::make_shared<const Schema>(name, doc, std::move(fields));
}

SchemaPtr make_schema(const std::string& name, const std::string& doc,
                      const std::vector<std::string>& field_names,
                      const std::vector<std::string>& field_descriptions) {
  if (field_names.size() != field_descriptions.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(field_names.size()) + " field names but " +
                    std::to_string(field_descriptions.size()) + " descriptions");
  }
  std::vector<FieldSpec> fields;
  fields.reserve(field_names.size());
  for (std::size_t i = 0; i < field_names.size(); ++i) {
    fields.push_back({field_names[i], field_descriptions[i], FieldKind::Text});
  }
  return make_schema(name, doc, std::move(fields));
}

const SchemaPtr& pdf_file_schema() {
  static const SchemaPtr schema = make_schema(
      "PDFFile", "A PDF document: its file name and the text extracted from it.",
      {{"filename", "The base name of the file", FieldKind::Text},
       {"contents", "The textual content extracted from the PDF", FieldKind::Text}});
  return schema;
}

const SchemaPtr& text_file_schema() {
  static const SchemaPtr schema =
      make_schema("TextFile", "A plain text file: its file name and contents.",
                  {{"filename", "The base name of the file", FieldKind::Text},
                   {"contents", "The contents of the file", FieldKind::Text}});
  return schema;
}

const SchemaPtr& aggregate_schema() {
  static const SchemaPtr schema = make_schema(
      "Aggregate", "Result of an aggregation.",
      {{"value", "The aggregated value", FieldKind::Number}});
  return schema;
}

std::optional<SchemaPtr> builtin_schema(std::string_view name) {
  if (name == pdf_file_schema()->name()) return pdf_file_schema();
  if (name == text_file_schema()->name()) return text_file_schema();
  return std::nullopt;
}

json schema_to_json(const Schema& schema) {
  json fields = json::array();
  for (const auto& f : schema.fields()) {
    fields.push_back({{"name", f.name}, {"description", f.description}, {"kind", to_string(f.kind)}});
  }
  return {{"name", schema.name()}, {"doc", schema.doc()}, {"fields", std::move(fields)}};
}

SchemaPtr schema_from_json(const json& j) {
  try {
    std::vector<FieldSpec> fields;
    for (const auto& f : j.at("fields")) {
      fields.push_back({f.at("name").get<std::string>(), f.at("description").get<std::string>(),
                        field_kind_from_string(f.value("kind", std::string("text")))});
    }
    return make_schema(j.at("name").get<std::string>(), j.value("doc", std::string()),
                       std::move(fields));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed schema: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  double out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(out)) {
    return std::nullopt;
  }
  return out;
}

std::optional<std::string> scalar_text(const json& raw) {
  if (raw.is_string()) return raw.get<std::string>();
  if (raw.is_boolean()) return raw.get<bool>() ? "true" : "false";
  if (raw.is_number()) return raw.dump();
  return std::nullopt;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::optional<Value> coerce_value(const json& raw, FieldKind kind) {
  if (raw.is_null()) return Value{};
  switch (kind) {
    case FieldKind::Text:
      if (auto s = scalar_text(raw)) return Value{*s};
      return std::nullopt;
    case FieldKind::Number:
      if (raw.is_number()) {
        double d = raw.get<double>();
        if (std::isfinite(d)) return Value{d};
        return std::nullopt;
      }
      if (raw.is_string()) {
        if (auto d = parse_number(raw.get<std::string>())) return Value{*d};
      }
      return std::nullopt;
    case FieldKind::Boolean:
      if (raw.is_boolean()) return Value{raw.get<bool>()};
      if (raw.is_string()) {
        auto s = lower(raw.get<std::string>());
        if (s == "true") return Value{true};
        if (s == "false") return Value{false};
      }
      return std::nullopt;
    case FieldKind::TextList: {
      if (raw.is_string()) return Value{TextList{raw.get<std::string>()}};
      if (!raw.is_array()) return std::nullopt;
      TextList out;
      for (const auto& item : raw) {
        auto s = scalar_text(item);
        if (!s) return std::nullopt;
        out.push_back(*s);
      }
      return Value{std::move(out)};
    }
  }
  return std::nullopt;
}

json value_to_json(const Value& value) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          // Integral values serialize without a trailing ".0".
          if (std::nearbyint(v) == v && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
          return v;
        } else {
          return v;
        }
      },
      value);
}

std::string value_to_text(const Value& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return value_to_json(value).dump();
}

const Value& Record::get(std::string_view field) const {
  auto idx = schema ? schema->index_of(field) : std::nullopt;
  if (!idx) {
    throw Error(ErrorCode::UnknownField,
                "record " + id + " has no field '" + std::string(field) + "'");
  }
  return values[*idx];
}

Record conform_record(const json& raw, SchemaPtr schema, std::vector<std::string> parents,
                      std::string id) {
  Record rec;
  rec.id = std::move(id);
  rec.parents = std::move(parents);
  rec.values.reserve(schema->fields().size());
  for (const auto& f : schema->fields()) {
    Value v;
    if (raw.is_object()) {
      auto it = raw.find(f.name);
      if (it != raw.end()) v = coerce_value(*it, f.kind).value_or(Value{});
    }
    rec.values.push_back(std::move(v));
  }
  rec.schema = std::move(schema);
  return rec;
}

Record conform_record(const json& raw, SchemaPtr schema, std::vector<std::string> parents) {
  static std::atomic<std::uint64_t> counter{0};
  return conform_record(raw, std::move(schema), std::move(parents),
                        "rec-" + std::to_string(++counter));
}

json record_to_json(const Record& record) {
  json values = json::object();
  for (std::size_t i = 0; i < record.values.size(); ++i) {
    values[record.schema->fields()[i].name] = value_to_json(record.values[i]);
  }
  json out = {{"id", record.id},
              {"schema", record.schema->name()},
              {"values", std::move(values)},
              {"parents", record.parents}};
  if (record.source) out["source"] = *record.source;
  if (record.error) out["error"] = *record.error;
  return out;
}

Record record_from_json(const json& j, SchemaPtr schema) {
  try {
    Record rec = conform_record(j.at("values"), std::move(schema),
                                j.at("parents").get<std::vector<std::string>>(),
                                j.at("id").get<std::string>());
    if (j.contains("source")) rec.source = j.at("source").get<std::string>();
    if (j.contains("error")) rec.error = j.at("error").get<std::string>();
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed record: ") + e.what());
  }
}

json records_to_json(const std::vector<Record>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(record_to_json(r));
  return out;
}

}  // namespace semflow
