#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace semflow {

using nlohmann::json;

enum class FieldKind { Text, Number, Boolean, TextList };

std::string_view to_string(FieldKind kind) noexcept;
FieldKind field_kind_from_string(std::string_view text);

struct FieldSpec {
  std::string name;
  std::string description;
  FieldKind kind = FieldKind::Text;

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// An immutable, named and ordered set of described fields. Instances are
/// only created through make_schema / schema_from_json, which enforce the
/// naming and uniqueness rules, and are shared via SchemaPtr.
class Schema {
 public:
  Schema(std::string name, std::string doc, std::vector<FieldSpec> fields);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const std::string& doc() const noexcept { return doc_; }
  [[nodiscard]] const std::vector<FieldSpec>& fields() const noexcept { return fields_; }
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view field) const noexcept;
  [[nodiscard]] bool has_field(std::string_view field) const noexcept {
    return index_of(field).has_value();
  }

  // Structural: name and ordered fields. The doc string does not participate.
  friend bool operator==(const Schema& a, const Schema& b) {
    return a.name_ == b.name_ && a.fields_ == b.fields_;
  }

 private:
  std::string name_;
  std::string doc_;
  std::vector<FieldSpec> fields_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

bool same_schema(const SchemaPtr& a, const SchemaPtr& b) noexcept;

/// True iff `name` matches [A-Za-z_][A-Za-z0-9_]*.
bool validate_field_name(std::string_view name) noexcept;

SchemaPtr make_schema(const std::string& name, const std::string& doc,
                      const std::vector<std::string>& field_names,
                      const std::vector<std::string>& field_descriptions);
SchemaPtr make_schema(const std::string& name, const std::string& doc,
                      std::vector<FieldSpec> fields);

const SchemaPtr& pdf_file_schema();
const SchemaPtr& text_file_schema();
/// Output schema of every Aggregate: a single number field called `value`.
const SchemaPtr& aggregate_schema();
/// Built-in schemas that datasets can be scanned into.
std::optional<SchemaPtr> builtin_schema(std::string_view name);

json schema_to_json(const Schema& schema);
SchemaPtr schema_from_json(const json& j);

// ---------------------------------------------------------------------------
// Values and records

using TextList = std::vector<std::string>;
/// monostate is the explicit null used for missing or failed extractions.
using Value = std::variant<std::monostate, std::string, double, bool, TextList>;

inline bool is_null(const Value& v) noexcept { return std::holds_alternative<std::monostate>(v); }

/// Converts a raw JSON value to the given kind. nullopt when not coercible.
std::optional<Value> coerce_value(const json& raw, FieldKind kind);
json value_to_json(const Value& value);
/// Canonical single-line-ish text used in prompts: strings verbatim, null as
/// `null`, lists as a JSON array.
std::string value_to_text(const Value& value);

struct Record {
  std::string id;
  SchemaPtr schema;
  std::vector<Value> values;  // aligned with schema->fields()
  std::vector<std::string> parents;
  std::optional<std::string> source;
  std::optional<std::string> error;

  [[nodiscard]] const Value& get(std::string_view field) const;

  friend bool operator==(const Record& a, const Record& b) {
    return a.id == b.id && same_schema(a.schema, b.schema) && a.values == b.values &&
           a.parents == b.parents && a.source == b.source && a.error == b.error;
  }
};

/// Builds a record of `schema` from an arbitrary JSON object. Every schema
/// field gets the raw value when present and coercible, null otherwise.
/// Unknown keys are dropped. Never throws on bad values.
Record conform_record(const json& raw, SchemaPtr schema, std::vector<std::string> parents,
                      std::string id);
/// Same, with a fresh process-unique id.
Record conform_record(const json& raw, SchemaPtr schema, std::vector<std::string> parents);

json record_to_json(const Record& record);
Record record_from_json(const json& j, SchemaPtr schema);
json records_to_json(const std::vector<Record>& records);

}  // namespace semflow
