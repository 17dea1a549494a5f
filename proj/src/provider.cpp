#include "semflow/provider.hpp"

#include <algorithm>
#include <fstream>

#include "semflow/error.hpp"

namespace semflow {

namespace {

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
}

}  // namespace

MockProvider::MockProvider(std::vector<MockRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty() || !rules_.back().match.empty()) {
    throw Error(ErrorCode::InvalidMockRules,
                "mock rules must end with a default rule whose match is empty");
  }
  for (const auto& r : rules_) {
    if (r.input_tokens < 0 || r.output_tokens < 0 || !(r.latency_s >= 0.0)) {
      throw Error(ErrorCode::InvalidMockRules, "mock rule '" + r.match + "' has negative usage");
    }
  }
}

MockProvider MockProvider::from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidMockRules, "mock rules must be a JSON array");
  std::vector<MockRule> rules;
  try {
    for (const auto& r : j) {
      MockRule rule;
      rule.match = r.value("match", std::string());
      rule.respond = r.value("respond", std::string());
      if (r.contains("tokens")) {
        const auto& t = r.at("tokens");
        rule.input_tokens = t.at(0).get<std::int64_t>();
        rule.output_tokens = t.at(1).get<std::int64_t>();
      }
      rule.latency_s = r.value("latency_s", 0.0);
      rule.unavailable = r.value("unavailable", false);
      rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidMockRules, std::string("malformed mock rule: ") + e.what());
  }
  return MockProvider(std::move(rules));
}

MockProvider MockProvider::load(const std::filesystem::path& file) {
  return from_json(read_json_file(file));
}

CompletionResponse MockProvider::complete(const CompletionRequest& request) {
  for (const auto& rule : rules_) {
    if (request.prompt.find(rule.match) == std::string::npos) continue;
    if (rule.unavailable) {
      throw Error(ErrorCode::ProviderUnavailable, "mock provider outage for model " + request.model_id);
    }
    {
      std::lock_guard lock(mutex_);
      ++counts_[request.model_id];
    }
    return {rule.respond, rule.input_tokens, rule.output_tokens, rule.latency_s};
  }
  // Unreachable: the constructor guarantees a catch-all rule.
  throw Error(ErrorCode::InvalidMockRules, "no mock rule matched");
}

std::map<std::string, std::int64_t> MockProvider::call_counts() const {
  std::lock_guard lock(mutex_);
  return counts_;
}

void MockProvider::reset_counts() {
  std::lock_guard lock(mutex_);
  counts_.clear();
}

// ---------------------------------------------------------------------------

ScriptedProvider::ScriptedProvider(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {}

std::vector<std::string> load_script(const std::filesystem::path& file) {
  json j = read_json_file(file);
  try {
    return j.get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ParseError, file.string() + ": expected a JSON list of strings");
  }
}

ScriptedProvider ScriptedProvider::load(const std::filesystem::path& file) {
  return ScriptedProvider(load_script(file));
}

CompletionResponse ScriptedProvider::complete(const CompletionRequest& request) {
  std::lock_guard lock(mutex_);
  prompts_.push_back(request.prompt);
  if (next_ >= outputs_.size()) {
    throw Error(ErrorCode::ProviderUnavailable, "scripted model has no outputs left");
  }
  return {outputs_[next_++], 0, 0, 0.0};
}

std::vector<std::string> ScriptedProvider::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard lock(mutex_);
  return outputs_.size() - next_;
}

std::size_t ScriptedProvider::consumed() const {
  std::lock_guard lock(mutex_);
  return next_;
}

void ScriptedProvider::advance(std::size_t n) {
  std::lock_guard lock(mutex_);
  next_ = std::min(outputs_.size(), next_ + n);
}

}  // namespace semflow
