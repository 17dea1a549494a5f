#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semflow/agent.hpp"

namespace semflow {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path dataset_root = "datasets";
  std::filesystem::path catalog_path;
  std::string provider_mode = "mock";  // mock | real
  std::filesystem::path mock_rules_path;
  /// Scripted reasoning-model outputs used by every session in mock mode.
  std::filesystem::path agent_script_path;
  /// One JSON file per session; empty disables persistence.
  std::filesystem::path snapshot_dir;
  std::optional<HttpProviderConfig> real_provider;
  std::string agent_model = "agent";
  std::size_t workers = 1;
  std::size_t step_budget = kDefaultStepBudget;

  /// Relative paths are resolved against `base_dir`.
  static ServiceConfig from_json(const json& j, const std::filesystem::path& base_dir = ".");
  static ServiceConfig load(const std::filesystem::path& file);
};

/// Reasoning model for one session. `calls_made` is how many replies the
/// session already consumed before a restart.
using LlmFactory =
    std::function<std::unique_ptr<ModelProvider>(const std::string& session_id, std::size_t calls_made)>;

struct SessionEvent {
  std::int64_t seq = 0;
  std::string kind;  // a step kind, or "error"
  json payload;
};

json event_to_json(const SessionEvent& event);

/// Sessions, datasets and the agent loop behind the HTTP routes. Each public
/// method is safe to call from any thread.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<ModelProvider> engine_provider, ModelCatalog catalog,
          LlmFactory llm_factory);
  /// Builds providers, catalog and agent model from the config.
  static std::unique_ptr<Service> from_config(const ServiceConfig& config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  [[nodiscard]] const ServiceConfig& config() const noexcept;
  DatasetRegistry& datasets() noexcept;

  std::string create_session();
  [[nodiscard]] bool has_session(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> session_ids() const;

  enum class PostResult { Accepted, NotFound, Busy };
  /// Starts the agent loop on a background thread.
  PostResult post_message(const std::string& id, const std::string& text);
  /// Blocks until the session's agent loop is idle.
  void wait_idle(const std::string& id);

  /// Events with seq > after. When `wait` is set, blocks until at least one
  /// exists or the timeout elapses.
  std::vector<SessionEvent> events(const std::string& id, std::int64_t after,
                                   std::optional<double> wait_s = std::nullopt);

  // Views below throw Error(UnknownSession).
  json pipeline(const std::string& id) const;
  json results(const std::string& id, std::size_t offset, std::size_t limit) const;
  std::optional<json> stats(const std::string& id) const;
  ExportBundle export_bundle(const std::string& id) const;
  AgentSession session(const std::string& id) const;

  /// Stores files under dataset_root/<dataset_id>/ and registers them.
  DataSource upload_dataset(const std::string& dataset_id,
                            const std::vector<std::pair<std::string, std::string>>& files);

  json snapshot(const std::string& id) const;
  void save_snapshots() const;

  /// Serves HTTP until stop(). Port 0 binds an ephemeral port; see port().
  bool listen();
  /// Binds without serving; returns the port or -1.
  int bind();
  bool listen_after_bind();
  [[nodiscard]] int port() const noexcept;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace semflow
