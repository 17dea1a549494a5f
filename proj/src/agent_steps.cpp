#include <cctype>

#include "semflow/agent.hpp"
#include "semflow/error.hpp"
#include "semflow/overloaded.hpp"

namespace semflow {

std::string_view step_kind(const AgentStep& step) noexcept {
  return std::visit(overloaded{[](const UserMessage&) { return "user"; },
                               [](const Thought&) { return "thought"; },
                               [](const Action&) { return "action"; },
                               [](const Observation&) { return "observation"; },
                               [](const FinalAnswer&) { return "final_answer"; }},
                    step);
}

json step_to_json(const AgentStep& step) {
  return std::visit(
      overloaded{[](const UserMessage& s) -> json { return {{"kind", "user"}, {"text", s.text}}; },
                 [](const Thought& s) -> json { return {{"kind", "thought"}, {"text", s.text}}; },
                 [](const Action& s) -> json {
                   return {{"kind", "action"},
                           {"thought", s.thought},
                           {"tool", s.tool},
                           {"args", s.args},
                           {"rendered", s.rendered}};
                 },
                 [](const Observation& s) -> json { return {{"kind", "observation"}, {"text", s.text}}; },
                 [](const FinalAnswer& s) -> json {
                   return {{"kind", "final_answer"}, {"thought", s.thought}, {"text", s.text}};
                 }},
      step);
}

AgentStep step_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "user") return UserMessage{j.at("text").get<std::string>()};
    if (kind == "thought") return Thought{j.at("text").get<std::string>()};
    if (kind == "observation") return Observation{j.at("text").get<std::string>()};
    if (kind == "action") {
      return Action{j.value("thought", std::string()), j.at("tool").get<std::string>(),
                    j.value("args", json::object()), j.value("rendered", std::string())};
    }
    if (kind == "final_answer") {
      return FinalAnswer{j.value("thought", std::string()), j.at("text").get<std::string>()};
    }
    throw Error(ErrorCode::ParseError, "unknown step kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed step: ") + e.what());
  }
}

namespace {

constexpr std::string_view kThought = "Thought:";
constexpr std::string_view kAction = "Action:";
constexpr std::string_view kActionInput = "Action Input:";
constexpr std::string_view kFinal = "Final Answer:";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

/// Text after `key` on line `first`, continued by following lines up to `last`.
std::string gather(const std::vector<std::string_view>& lines, std::size_t first, std::size_t last,
                   std::string_view key) {
  std::string out(ltrim(lines[first]).substr(key.size()));
  for (std::size_t i = first + 1; i < last; ++i) {
    out += '\n';
    out += lines[i];
  }
  return std::string(trim(out));
}

}  // namespace

AgentStep parse_step(std::string_view text) {
  auto lines = split_lines(text);
  const std::size_t npos = lines.size();
  std::size_t thought = npos, action = npos, final_answer = npos;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = ltrim(lines[i]);
    if (thought == npos && starts_with(line, kThought)) thought = i;
    // "Action Input:" also starts with "Action"; it is not an action header.
    if (action == npos && starts_with(line, kAction)) action = i;
    if (final_answer == npos && starts_with(line, kFinal)) final_answer = i;
    if (action != npos || final_answer != npos) break;
  }
  const std::size_t main = std::min(action, final_answer);
  std::string thought_text;
  if (thought != npos && thought < main) thought_text = gather(lines, thought, main, kThought);

  if (main == npos) {
    if (thought == npos) {
      throw Error(ErrorCode::UnparseableStep,
                  "reply has neither an Action nor a Final Answer nor a Thought");
    }
    return Thought{thought_text};
  }

  if (main == final_answer) {
    return FinalAnswer{thought_text, gather(lines, final_answer, npos, kFinal)};
  }

  std::string tool(trim(ltrim(lines[action]).substr(kAction.size())));
  if (tool.empty()) throw Error(ErrorCode::UnparseableStep, "Action names no tool");
  for (std::size_t i = action + 1; i < lines.size(); ++i) {
    auto line = ltrim(lines[i]);
    if (!starts_with(line, kActionInput)) continue;
    auto payload = trim(line.substr(kActionInput.size()));
    json args = json::parse(payload.begin(), payload.end(), nullptr, false);
    if (args.is_discarded() || !args.is_object()) {
      throw Error(ErrorCode::UnparseableStep, "Action Input must be a one-line JSON object");
    }
    return Action{thought_text, tool, std::move(args), {}};
  }
  throw Error(ErrorCode::UnparseableStep, "Action has no Action Input line");
}

std::string format_step(const AgentStep& step) {
  auto with_thought = [](const std::string& thought, std::string rest) {
    if (thought.empty()) return rest;
    return "Thought: " + thought + "\n" + rest;
  };
  return std::visit(
      overloaded{[](const UserMessage& s) { return "User: " + s.text; },
                 [](const Thought& s) { return "Thought: " + s.text; },
                 [&](const Action& s) {
                   return with_thought(s.thought,
                                       "Action: " + s.tool + "\nAction Input: " + s.args.dump());
                 },
                 [](const Observation& s) { return "Observation: " + s.text; },
                 [&](const FinalAnswer& s) { return with_thought(s.thought, "Final Answer: " + s.text); }},
      step);
}

}  // namespace semflow
