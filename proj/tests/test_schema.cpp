#include <doctest.h>

#include <regex>

#include "support.hpp"

using namespace semflow;
using testing::error_of;

TEST_SUITE("schema") {

TEST_CASE("field names follow the identifier rule") {
  CHECK(validate_field_name("dataset_name"));
  CHECK_FALSE(validate_field_name(""));
  CHECK_FALSE(validate_field_name("my field!"));
  CHECK(validate_field_name("_x9"));
  CHECK_FALSE(validate_field_name("9x"));
}

TEST_CASE("validate_field_name agrees with a regex oracle") {
  const std::regex oracle("[A-Za-z_][A-Za-z0-9_]*");
  const std::string alphabet = "aZ_09 -!.\xc3\xa9";
  std::mt19937 rng(7);
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    auto len = rng() % 6;
    for (unsigned k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    CHECK_MESSAGE(validate_field_name(s) == std::regex_match(s, oracle), s);
  }
}

TEST_CASE("make_schema builds the chat-created schema") {
  auto s = testing::clinical_schema();
  REQUIRE(s->fields().size() == 3);
  CHECK(s->name() == "ClinicalData");
  CHECK(s->fields()[2].name == "url");
  CHECK(s->fields()[2].description == "The public URL where the dataset can be accessed");
  for (const auto& f : s->fields()) CHECK(f.kind == FieldKind::Text);
}

TEST_CASE("make_schema errors") {
  CHECK(error_of([] { make_schema("A", "d", {"a", "b"}, {"x"}); }) == ErrorCode::LengthMismatch);
  CHECK(error_of([] { make_schema("A", "d", {"a", "a"}, {"x", "y"}); }) == ErrorCode::DuplicateField);
  CHECK(error_of([] { make_schema("A", "d", {"bad name"}, {"x"}); }) == ErrorCode::InvalidFieldName);
  CHECK(error_of([] { make_schema("A", "d", {}, {}); }) == ErrorCode::EmptyFields);
  CHECK(error_of([] { make_schema("A", "d", {"a"}, {""}); }) == ErrorCode::EmptyDescription);
  CHECK(error_of([] { make_schema("", "d", {"a"}, {"x"}); }) == ErrorCode::InvalidSchemaName);
}

TEST_CASE("make_schema round-trips names and descriptions") {
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> names, descs;
    auto n = 1 + rng() % 8;
    for (unsigned k = 0; k < n; ++k) {
      names.push_back("f" + std::to_string(k) + "_" + std::to_string(rng() % 100));
      descs.push_back("description " + std::to_string(rng()));
    }
    auto s = make_schema("S" + std::to_string(i), "doc", names, descs);
    for (unsigned k = 0; k < n; ++k) {
      CHECK(s->fields()[k].name == names[k]);
      CHECK(s->fields()[k].description == descs[k]);
    }
    auto back = schema_from_json(schema_to_json(*s));
    CHECK(*back == *s);
    CHECK(back->doc() == s->doc());
  }
}

TEST_CASE("schema equality is structural and ignores doc") {
  auto a = make_schema("A", "one", {"x"}, {"d"});
  auto b = make_schema("A", "two", {"x"}, {"d"});
  auto c = make_schema("B", "one", {"x"}, {"d"});
  CHECK(same_schema(a, b));
  CHECK_FALSE(same_schema(a, c));
}

TEST_CASE("schema JSON shape") {
  auto j = schema_to_json(*testing::clinical_schema());
  CHECK(j["name"] == "ClinicalData");
  CHECK(j["fields"][0] == json{{"name", "name"},
                               {"description", "The name of the clinical data dataset"},
                               {"kind", "text"}});
}

TEST_CASE("conform_record fills missing fields with null") {
  auto s = testing::clinical_schema();
  auto r = conform_record({{"name", "TCGA"}, {"url", "http://x"}}, s, {"r1"}, "out");
  CHECK(std::get<std::string>(r.get("name")) == "TCGA");
  CHECK(is_null(r.get("description")));
  CHECK(std::get<std::string>(r.get("url")) == "http://x");
  CHECK(r.parents == std::vector<std::string>{"r1"});
}

TEST_CASE("conform_record on an empty map and with junk keys") {
  auto s = testing::clinical_schema();
  auto empty = conform_record(json::object(), s, {"r1"});
  for (const auto& v : empty.values) CHECK(is_null(v));
  auto junk = conform_record({{"name", "A"}, {"junk", 1}}, s, {});
  CHECK(record_to_json(junk)["values"].size() == 3);
  CHECK_FALSE(record_to_json(junk)["values"].contains("junk"));
  CHECK(empty.id != junk.id);
}

TEST_CASE("coercion by kind") {
  CHECK(std::get<double>(*coerce_value(json(3), FieldKind::Number)) == 3.0);
  CHECK(std::get<double>(*coerce_value(json("2.5"), FieldKind::Number)) == 2.5);
  CHECK_FALSE(coerce_value(json("abc"), FieldKind::Number));
  CHECK(std::get<bool>(*coerce_value(json("true"), FieldKind::Boolean)));
  CHECK(std::get<TextList>(*coerce_value(json::array({"a", "b"}), FieldKind::TextList)) ==
        TextList{"a", "b"});
  CHECK(std::get<std::string>(*coerce_value(json(7), FieldKind::Text)) == "7");
}

TEST_CASE("conform_record always satisfies record invariants") {
  auto s = make_schema("Mixed", "d",
                       {FieldSpec{"t", "text", FieldKind::Text}, FieldSpec{"n", "num", FieldKind::Number},
                        FieldSpec{"b", "bool", FieldKind::Boolean},
                        FieldSpec{"l", "list", FieldKind::TextList}});
  std::mt19937 rng(5);
  const std::vector<json> pool = {json(nullptr), json(1),   json(-2.5),         json("x"),
                                  json("3"),     json(true), json::array({"a"}), json::array({1, 2}),
                                  json::object({{"k", 1}})};
  const std::vector<std::string> keys = {"t", "n", "b", "l", "zz"};
  for (int i = 0; i < 1000; ++i) {
    json raw = json::object();
    for (const auto& k : keys) {
      if (rng() % 2) raw[k] = pool[rng() % pool.size()];
    }
    auto r = conform_record(raw, s, {"p"});
    REQUIRE(r.values.size() == 4);
    CHECK(r.parents == std::vector<std::string>{"p"});
    for (std::size_t f = 0; f < 4; ++f) {
      const auto& v = r.values[f];
      if (is_null(v)) continue;
      switch (s->fields()[f].kind) {
        case FieldKind::Text: CHECK(std::holds_alternative<std::string>(v)); break;
        case FieldKind::Number: CHECK(std::holds_alternative<double>(v)); break;
        case FieldKind::Boolean: CHECK(std::holds_alternative<bool>(v)); break;
        case FieldKind::TextList: CHECK(std::holds_alternative<TextList>(v)); break;
      }
    }
    CHECK(record_from_json(record_to_json(r), s) == r);
  }
}

TEST_CASE("built-in schemas") {
  CHECK(pdf_file_schema()->name() == "PDFFile");
  CHECK(text_file_schema()->name() == "TextFile");
  CHECK(pdf_file_schema()->has_field("contents"));
  CHECK(aggregate_schema()->fields().size() == 1);
  CHECK(builtin_schema("PDFFile").has_value());
  CHECK_FALSE(builtin_schema("ClinicalData").has_value());
}

}
