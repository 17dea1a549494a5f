#include <regex>
#include <set>
#include <sstream>

#include "semflow/agent.hpp"
#include "semflow/error.hpp"

namespace semflow {

namespace {

const std::regex& placeholder_re() {
  static const std::regex re(R"(\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\})");
  return re;
}

}  // namespace

std::vector<std::string> template_variables(std::string_view body) {
  std::vector<std::string> out;
  std::string text(body);
  for (std::sregex_iterator it(text.begin(), text.end(), placeholder_re()), end; it != end; ++it) {
    out.push_back((*it)[1].str());
  }
  return out;
}

std::string canonical_text(const json& value) {
  if (value.is_string()) {
    std::string quoted = value.dump();
    std::string out;
    out.reserve(quoted.size());
    for (char c : quoted) {
      if (c == '{') {
        out += "\\u007b";
      } else if (c == '}') {
        out += "\\u007d";
      } else {
        out += c;
      }
    }
    return out;
  }
  if (value.is_array()) {
    std::string out = "[";
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i > 0) out += ", ";
      out += canonical_text(value[i]);
    }
    return out + "]";
  }
  if (value.is_object()) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : value.items()) {
      if (!first) out += ", ";
      first = false;
      out += canonical_text(json(k)) + ": " + canonical_text(v);
    }
    return out + "}";
  }
  return value.dump();
}

std::string render_tool(const ToolSpec& spec, const json& bindings) {
  std::string out;
  const std::string& body = spec.body;
  std::size_t last = 0;
  for (std::sregex_iterator it(body.begin(), body.end(), placeholder_re()), end; it != end; ++it) {
    const auto& m = *it;
    const std::string name = m[1].str();
    if (!bindings.is_object() || !bindings.contains(name)) {
      throw Error(ErrorCode::MissingBinding, name);
    }
    out.append(body, last, static_cast<std::size_t>(m.position(0)) - last);
    out += canonical_text(bindings.at(name));
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(body, last, std::string::npos);
  return out;
}

void ToolRegistry::register_tool(ToolSpec spec) {
  if (!validate_field_name(spec.name)) {
    throw Error(ErrorCode::InvalidArguments, "tool name '" + spec.name + "' is not an identifier");
  }
  if (find(spec.name) != nullptr) {
    throw Error(ErrorCode::DuplicateTool, "a tool named '" + spec.name + "' is already registered");
  }
  std::set<std::string> declared;
  for (const auto& a : spec.args) {
    if (!declared.insert(a.name).second) {
      throw Error(ErrorCode::InvalidArguments,
                  "tool " + spec.name + " declares argument '" + a.name + "' twice");
    }
  }
  for (const auto& var : template_variables(spec.body)) {
    if (declared.count(var) == 0) {
      throw Error(ErrorCode::UnboundTemplateVariable,
                  "tool " + spec.name + " template uses undeclared variable '" + var + "'");
    }
  }
  if (!spec.handler) {
    throw Error(ErrorCode::InvalidArguments, "tool " + spec.name + " has no handler");
  }
  tools_.push_back(std::move(spec));
}

const ToolSpec* ToolRegistry::find(std::string_view name) const {
  for (const auto& t : tools_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string ToolRegistry::system_preamble() const {
  std::ostringstream os;
  os << "You build and run document processing pipelines for the user by calling tools.\n"
        "Think step by step. To call a tool, reply with:\n"
        "Thought: <your reasoning>\n"
        "Action: <tool name>\n"
        "Action Input: <the arguments as a JSON object on a single line>\n"
        "You will then receive an Observation with the result. When the request is complete, "
        "or no tool is needed, reply with:\n"
        "Final Answer: <your answer to the user>\n"
        "\n"
        "Available tools:\n";
  for (const auto& t : tools_) {
    os << "\nTOOL " << t.name << "\n" << t.summary << "\nARGS:\n";
    for (const auto& a : t.args) os << a.name << " (" << a.type << "): " << a.description << "\n";
  }
  return os.str();
}

}  // namespace semflow
