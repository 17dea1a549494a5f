#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "semflow/schema.hpp"

namespace semflow {

struct CompletionRequest {
  std::string model_id;
  std::string prompt;
};

struct CompletionResponse {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_s = 0.0;
};

/// A model service. Implementations must be callable from several threads at
/// once and throw Error(ProviderUnavailable) when the service cannot answer.
class ModelProvider {
 public:
  virtual ~ModelProvider() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
  /// When true, reported latencies are the clock: stats use them instead of
  /// measured wall time, which makes timings reproducible.
  [[nodiscard]] virtual bool deterministic_clock() const noexcept { return false; }
};

struct MockRule {
  std::string match;  // substring of the prompt; empty matches everything
  std::string respond;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_s = 0.0;
  bool unavailable = false;  // simulate an outage instead of answering
};

/// Deterministic stand-in for a model service: the first rule whose `match`
/// occurs in the prompt answers. The last rule must match everything.
class MockProvider final : public ModelProvider {
 public:
  explicit MockProvider(std::vector<MockRule> rules);

  /// [{match, respond, tokens?: [in, out], latency_s?, unavailable?}]
  static MockProvider from_json(const json& j);
  static MockProvider load(const std::filesystem::path& file);

  CompletionResponse complete(const CompletionRequest& request) override;
  [[nodiscard]] bool deterministic_clock() const noexcept override { return true; }

  [[nodiscard]] const std::vector<MockRule>& rules() const noexcept { return rules_; }
  /// Number of completed calls per model id since construction or reset.
  [[nodiscard]] std::map<std::string, std::int64_t> call_counts() const;
  void reset_counts();

 private:
  std::vector<MockRule> rules_;
  mutable std::mutex mutex_;
  std::map<std::string, std::int64_t> counts_;
};

/// Scripted-model fixture: a JSON list of verbatim model outputs.
std::vector<std::string> load_script(const std::filesystem::path& file);

/// Replays a fixed list of model outputs in order, ignoring the prompt.
/// Used to script the agent's reasoning model.
class ScriptedProvider final : public ModelProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> outputs);
  static ScriptedProvider load(const std::filesystem::path& file);

  CompletionResponse complete(const CompletionRequest& request) override;
  [[nodiscard]] bool deterministic_clock() const noexcept override { return true; }

  [[nodiscard]] std::vector<std::string> prompts() const;
  [[nodiscard]] std::size_t remaining() const;
  [[nodiscard]] std::size_t consumed() const;
  /// Drops the next `n` outputs, e.g. to resume a restored session.
  void advance(std::size_t n);

 private:
  std::vector<std::string> outputs_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
  mutable std::mutex mutex_;
};

struct HttpProviderConfig {
  /// Full URL of an OpenAI-compatible chat completions endpoint.
  std::string endpoint;
  /// Catalog model id -> provider model name. Unmapped ids pass through.
  std::map<std::string, std::string> model_map;
  /// Environment variable holding the bearer token.
  std::string api_key_env = "SEMFLOW_API_KEY";
  double timeout_s = 120.0;

  static HttpProviderConfig from_json(const json& j);
};

class HttpProvider final : public ModelProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  HttpProviderConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace semflow
