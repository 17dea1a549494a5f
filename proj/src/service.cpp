#include "semflow/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "semflow/error.hpp"

namespace semflow {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool valid_dataset_id(const std::string& id) {
  if (id.empty() || id.front() == '.' || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

/// Counts replies so a restored session can resume its script.
class CountingProvider final : public ModelProvider {
 public:
  CountingProvider(std::unique_ptr<ModelProvider> inner, std::atomic<std::size_t>& calls)
      : inner_(std::move(inner)), calls_(calls) {}

  CompletionResponse complete(const CompletionRequest& request) override {
    auto response = inner_->complete(request);
    ++calls_;
    return response;
  }
  [[nodiscard]] bool deterministic_clock() const noexcept override {
    return inner_->deterministic_clock();
  }

 private:
  std::unique_ptr<ModelProvider> inner_;
  std::atomic<std::size_t>& calls_;
};

void write_atomically(const fs::path& file, const std::string& text) {
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, file);
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& j, const fs::path& base_dir) {
  try {
    ServiceConfig c;
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.dataset_root = resolve(base_dir, j.value("dataset_root", std::string("datasets")));
    c.catalog_path = resolve(base_dir, j.value("catalog", std::string()));
    c.agent_script_path = resolve(base_dir, j.value("agent_script", std::string()));
    c.snapshot_dir = resolve(base_dir, j.value("snapshot_dir", std::string()));
    c.agent_model = j.value("agent_model", c.agent_model);
    c.workers = j.value("workers", c.workers);
    c.step_budget = j.value("step_budget", c.step_budget);
    if (j.contains("provider")) {
      const auto& p = j.at("provider");
      c.provider_mode = p.value("mode", c.provider_mode);
      c.mock_rules_path = resolve(base_dir, p.value("rules", std::string()));
      if (c.provider_mode == "real") c.real_provider = HttpProviderConfig::from_json(p);
    }
    if (c.provider_mode != "mock" && c.provider_mode != "real") {
      throw Error(ErrorCode::ParseError, "provider.mode must be mock or real");
    }
    if (c.workers == 0) throw Error(ErrorCode::ParseError, "workers must be positive");
    if (c.step_budget == 0) throw Error(ErrorCode::ParseError, "step_budget must be positive");
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed service config: ") + e.what());
  }
}

ServiceConfig ServiceConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, file.string() + ": invalid JSON");
  return from_json(j, file.parent_path());
}

json event_to_json(const SessionEvent& event) {
  return {{"seq", event.seq}, {"kind", event.kind}, {"payload", event.payload}};
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  struct Session {
    mutable std::mutex mutex;
    std::condition_variable cv;
    AgentSession agent;
    std::vector<SessionEvent> events;
    bool running = false;
    std::atomic<std::size_t> llm_calls{0};
    std::unique_ptr<ModelProvider> llm;
    std::thread worker;
    std::string created_at;
    std::string updated_at;
  };

  ServiceConfig config;
  std::shared_ptr<ModelProvider> engine;
  ModelCatalog catalog;
  UdfRegistry udfs = UdfRegistry::with_builtins();
  ToolRegistry tools = ToolRegistry::with_builtins();
  LlmFactory factory;
  DatasetRegistry datasets;

  mutable std::mutex mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t next_id = 1;

  httplib::Server server;
  int bound_port = -1;
  std::atomic<bool> stopping{false};

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  std::shared_ptr<Session> get(const std::string& id) const {
    auto s = find(id);
    if (!s) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
    return s;
  }

  void attach_llm(const std::string& id, Session& s) {
    s.llm = std::make_unique<CountingProvider>(factory(id, s.llm_calls.load()), s.llm_calls);
  }

  json snapshot_locked(const Session& s) const {
    json transcript = json::array();
    for (const auto& step : s.agent.transcript) transcript.push_back(step_to_json(step));
    json events = json::array();
    for (const auto& e : s.events) events.push_back(event_to_json(e));
    return {{"id", s.agent.id},
            {"created_at", s.created_at},
            {"updated_at", s.updated_at},
            {"step_budget", s.agent.step_budget},
            {"llm_calls", s.llm_calls.load()},
            {"transcript", std::move(transcript)},
            {"events", std::move(events)},
            {"state", pipeline_state_to_json(s.agent.state)}};
  }

  void persist(const Session& s) const {
    if (config.snapshot_dir.empty()) return;
    try {
      fs::create_directories(config.snapshot_dir);
      json snap;
      {
        std::lock_guard lock(s.mutex);
        snap = snapshot_locked(s);
      }
      write_atomically(config.snapshot_dir / (s.agent.id + ".json"), snap.dump(2) + "\n");
      persist_datasets();
    } catch (const std::exception& e) {
      std::cerr << "semflow: snapshot of " << s.agent.id << " failed: " << e.what() << "\n";
    }
  }

  void persist_datasets() const {
    if (config.snapshot_dir.empty()) return;
    fs::create_directories(config.snapshot_dir);
    write_atomically(config.snapshot_dir / "datasets.json", datasets.to_json().dump(2) + "\n");
  }

  void restore() {
    if (config.snapshot_dir.empty() || !fs::is_directory(config.snapshot_dir)) return;
    if (fs::exists(config.snapshot_dir / "datasets.json")) {
      try {
        datasets.load(config.snapshot_dir / "datasets.json");
      } catch (const std::exception& e) {
        std::cerr << "semflow: dataset registry not restored: " << e.what() << "\n";
      }
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(config.snapshot_dir)) {
      if (entry.path().extension() == ".json" && entry.path().filename() != "datasets.json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      try {
        std::ifstream in(file);
        json j = json::parse(in);
        auto s = std::make_shared<Session>();
        s->agent.id = j.at("id").get<std::string>();
        s->agent.step_budget = j.value("step_budget", config.step_budget);
        for (const auto& step : j.at("transcript")) s->agent.transcript.push_back(step_from_json(step));
        for (const auto& e : j.at("events")) {
          s->events.push_back({e.at("seq").get<std::int64_t>(), e.at("kind").get<std::string>(),
                               e.at("payload")});
        }
        s->agent.state = pipeline_state_from_json(j.at("state"));
        s->created_at = j.value("created_at", std::string());
        s->updated_at = j.value("updated_at", std::string());
        s->llm_calls = j.value("llm_calls", std::size_t{0});
        attach_llm(s->agent.id, *s);

        const std::string& id = s->agent.id;
        if (id.rfind("session-", 0) == 0) {
          try {
            next_id = std::max<std::uint64_t>(next_id, std::stoull(id.substr(8)) + 1);
          } catch (const std::exception&) {
          }
        }
        sessions[id] = std::move(s);
      } catch (const std::exception& e) {
        std::cerr << "semflow: skipping snapshot " << file << ": " << e.what() << "\n";
      }
    }
  }

  void run(const std::shared_ptr<Session>& s, const std::string& text) {
    AgentSession local;
    {
      std::lock_guard lock(s->mutex);
      local = s->agent;
    }
    AgentOptions options;
    options.model_id = config.agent_model;
    options.on_step = [&](const AgentStep& step) {
      std::lock_guard lock(s->mutex);
      s->agent.transcript.push_back(step);
      auto seq = static_cast<std::int64_t>(s->events.size());
      s->events.push_back({seq, std::string(step_kind(step)), step_to_json(step)});
      s->cv.notify_all();
    };
    ToolContext ctx{datasets, *engine, catalog, udfs, CardinalityModel{}, config.workers,
                    config.dataset_root};

    std::optional<std::string> failure;
    try {
      run_agent(text, local, *s->llm, tools, ctx, options);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    {
      std::lock_guard lock(s->mutex);
      s->agent.state = std::move(local.state);
      if (failure) {
        auto seq = static_cast<std::int64_t>(s->events.size());
        s->events.push_back({seq, "error", {{"message", *failure}}});
      }
      s->updated_at = utc_now();
    }
    persist(*s);
    {
      std::lock_guard lock(s->mutex);
      s->running = false;
    }
    s->cv.notify_all();
  }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void reply_error(httplib::Response& res, int status, const std::string& code,
                          const std::string& message) {
    reply(res, status, {{"error", code}, {"message", message}});
  }

  void routes(Service& svc);
};

Service::Service(ServiceConfig config, std::shared_ptr<ModelProvider> engine_provider,
                 ModelCatalog catalog, LlmFactory llm_factory)
    : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->engine = std::move(engine_provider);
  impl_->catalog = std::move(catalog);
  impl_->factory = std::move(llm_factory);
  impl_->restore();
  impl_->routes(*this);
}

std::unique_ptr<Service> Service::from_config(const ServiceConfig& config) {
  if (config.catalog_path.empty()) throw Error(ErrorCode::InvalidCatalog, "service config names no catalog");
  auto catalog = ModelCatalog::load(config.catalog_path);

  std::shared_ptr<ModelProvider> engine;
  LlmFactory factory;
  if (config.provider_mode == "mock") {
    if (config.mock_rules_path.empty()) {
      throw Error(ErrorCode::InvalidMockRules, "mock mode needs provider.rules");
    }
    engine = std::make_shared<MockProvider>(MockProvider::load(config.mock_rules_path).rules());
    auto script = config.agent_script_path;
    factory = [script](const std::string&, std::size_t calls_made) -> std::unique_ptr<ModelProvider> {
      auto llm = std::make_unique<ScriptedProvider>(script.empty() ? std::vector<std::string>{}
                                                                   : load_script(script));
      llm->advance(calls_made);
      return llm;
    };
  } else {
    if (!config.real_provider) throw Error(ErrorCode::ProviderUnavailable, "real mode needs provider settings");
    engine = std::make_shared<HttpProvider>(*config.real_provider);
    auto real = *config.real_provider;
    factory = [real](const std::string&, std::size_t) -> std::unique_ptr<ModelProvider> {
      return std::make_unique<HttpProvider>(real);
    };
  }
  return std::make_unique<Service>(config, std::move(engine), std::move(catalog), std::move(factory));
}

Service::~Service() {
  stop();
  std::vector<std::shared_ptr<Impl::Session>> all;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& [id, s] : impl_->sessions) all.push_back(s);
  }
  for (auto& s : all) {
    if (s->worker.joinable()) s->worker.join();
  }
}

const ServiceConfig& Service::config() const noexcept { return impl_->config; }
DatasetRegistry& Service::datasets() noexcept { return impl_->datasets; }

std::string Service::create_session() {
  auto s = std::make_shared<Impl::Session>();
  {
    std::lock_guard lock(impl_->mutex);
    s->agent.id = "session-" + std::to_string(impl_->next_id++);
    s->agent.step_budget = impl_->config.step_budget;
    s->created_at = s->updated_at = utc_now();
    impl_->attach_llm(s->agent.id, *s);
    impl_->sessions[s->agent.id] = s;
  }
  impl_->persist(*s);
  return s->agent.id;
}

bool Service::has_session(const std::string& id) const { return impl_->find(id) != nullptr; }

std::vector<std::string> Service::session_ids() const {
  std::lock_guard lock(impl_->mutex);
  std::vector<std::string> ids;
  for (const auto& [id, s] : impl_->sessions) ids.push_back(id);
  return ids;
}

Service::PostResult Service::post_message(const std::string& id, const std::string& text) {
  auto s = impl_->find(id);
  if (!s) return PostResult::NotFound;
  {
    std::lock_guard lock(s->mutex);
    if (s->running) return PostResult::Busy;
    s->running = true;
  }
  if (s->worker.joinable()) s->worker.join();
  s->worker = std::thread([this, s, text] { impl_->run(s, text); });
  return PostResult::Accepted;
}

void Service::wait_idle(const std::string& id) {
  auto s = impl_->get(id);
  std::unique_lock lock(s->mutex);
  s->cv.wait(lock, [&] { return !s->running; });
}

std::vector<SessionEvent> Service::events(const std::string& id, std::int64_t after,
                                          std::optional<double> wait_s) {
  auto s = impl_->get(id);
  std::unique_lock lock(s->mutex);
  auto ready = [&] { return static_cast<std::int64_t>(s->events.size()) > after + 1; };
  if (wait_s && !ready()) {
    s->cv.wait_for(lock, std::chrono::duration<double>(*wait_s), ready);
  }
  std::vector<SessionEvent> out;
  for (const auto& e : s->events) {
    if (e.seq > after) out.push_back(e);
  }
  return out;
}

json Service::pipeline(const std::string& id) const {
  auto s = impl_->get(id);
  std::lock_guard lock(s->mutex);
  const auto& state = s->agent.state;
  json schemas = json::object();
  for (const auto& [name, schema] : state.schemas) schemas[name] = schema_to_json(*schema);
  LogicalPlan plan = state.plan.value_or(LogicalPlan());
  return {{"dataset_id", state.dataset_id ? json(*state.dataset_id) : json(nullptr)},
          {"plan", plan_to_json(plan)},
          {"pipeline", plan.empty() ? json(nullptr) : pipeline_json(plan, state.policy)},
          {"schemas", std::move(schemas)},
          {"policy", state.policy ? policy_to_json(*state.policy) : json(nullptr)},
          {"diagnostics", validate_plan(plan)}};
}

json Service::results(const std::string& id, std::size_t offset, std::size_t limit) const {
  auto s = impl_->get(id);
  std::lock_guard lock(s->mutex);
  const auto& results = s->agent.state.results;
  std::size_t total = results ? results->size() : 0;
  json records = json::array();
  for (std::size_t i = offset; i < total && i - offset < limit; ++i) {
    records.push_back(record_to_json((*results)[i]));
  }
  return {{"total", total}, {"offset", offset}, {"limit", limit}, {"records", std::move(records)}};
}

std::optional<json> Service::stats(const std::string& id) const {
  auto s = impl_->get(id);
  std::lock_guard lock(s->mutex);
  if (!s->agent.state.stats) return std::nullopt;
  return stats_to_json(*s->agent.state.stats);
}

ExportBundle Service::export_bundle(const std::string& id) const {
  auto s = impl_->get(id);
  std::lock_guard lock(s->mutex);
  return export_code(s->agent.state);
}

AgentSession Service::session(const std::string& id) const {
  auto s = impl_->get(id);
  std::lock_guard lock(s->mutex);
  return s->agent;
}

DataSource Service::upload_dataset(const std::string& dataset_id,
                                   const std::vector<std::pair<std::string, std::string>>& files) {
  if (!valid_dataset_id(dataset_id)) {
    throw Error(ErrorCode::InvalidArguments, "dataset id must use letters, digits, '_', '-' or '.'");
  }
  if (files.empty()) throw Error(ErrorCode::EmptyDirectory, "no files uploaded");
  std::vector<std::pair<fs::path, const std::string*>> targets;
  for (const auto& [name, content] : files) {
    fs::path base = fs::path(name).filename();
    std::string b = base.string();
    if (b.empty() || b.front() == '.') {
      throw Error(ErrorCode::InvalidArguments, "invalid file name '" + name + "'");
    }
    targets.emplace_back(base, &content);
  }
  fs::path dir = impl_->config.dataset_root / dataset_id;
  fs::create_directories(dir);
  for (const auto& [name, content] : targets) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
    out << *content;
  }
  auto src = impl_->datasets.register_dataset(dataset_id, dir);
  if (!impl_->config.snapshot_dir.empty()) impl_->persist_datasets();
  return src;
}

json Service::snapshot(const std::string& id) const {
  auto s = impl_->get(id);
  std::lock_guard lock(s->mutex);
  return impl_->snapshot_locked(*s);
}

void Service::save_snapshots() const {
  std::vector<std::shared_ptr<Impl::Session>> all;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& [id, s] : impl_->sessions) all.push_back(s);
  }
  for (const auto& s : all) impl_->persist(*s);
}

bool Service::listen() {
  if (bind() < 0) return false;
  return listen_after_bind();
}

int Service::bind() {
  auto& c = impl_->config;
  if (c.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(c.host);
  } else {
    impl_->bound_port = impl_->server.bind_to_port(c.host, c.port) ? c.port : -1;
  }
  return impl_->bound_port;
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

int Service::port() const noexcept { return impl_->bound_port; }

void Service::stop() {
  impl_->stopping = true;
  if (impl_->server.is_running()) impl_->server.stop();
}

// ---------------------------------------------------------------------------
// HTTP routes

void Service::Impl::routes(Service& svc) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type, Last-Event-ID"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      reply_error(res, 500, "Internal", e.what());
    }
  });

  server.Post("/sessions", [&svc](const httplib::Request&, httplib::Response& res) {
    reply(res, 201, {{"session_id", svc.create_session()}});
  });

  server.Post(R"(/sessions/([^/]+)/messages)", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!svc.has_session(id)) return reply_error(res, 404, "UnknownSession", "no session '" + id + "'");
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      return reply_error(res, 400, "BadRequest", "body must be a JSON object with a string field 'text'");
    }
    if (body["text"].get<std::string>().empty()) {
      return reply_error(res, 400, "BadRequest", "'text' must not be empty");
    }
    switch (svc.post_message(id, body["text"].get<std::string>())) {
      case PostResult::Accepted:
        return reply(res, 202, {{"session_id", id}, {"status", "accepted"}});
      case PostResult::Busy:
        return reply_error(res, 409, "SessionBusy", "the agent is still working on the previous message");
      case PostResult::NotFound:
        return reply_error(res, 404, "UnknownSession", "no session '" + id + "'");
    }
  });

  server.Get(R"(/sessions/([^/]+)/events)", [this, &svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!svc.has_session(id)) return reply_error(res, 404, "UnknownSession", "no session '" + id + "'");
    std::int64_t after = -1;
    try {
      if (req.has_param("after")) {
        after = std::stoll(req.get_param_value("after"));
      } else if (req.has_header("Last-Event-ID")) {
        after = std::stoll(req.get_header_value("Last-Event-ID"));
      }
    } catch (const std::exception&) {
      return reply_error(res, 400, "BadRequest", "'after' must be an integer");
    }
    res.set_header("Cache-Control", "no-cache");
    auto cursor = std::make_shared<std::int64_t>(after);
    auto done = std::make_shared<bool>(false);
    res.set_chunked_content_provider(
        "text/event-stream", [this, &svc, id, cursor, done](std::size_t, httplib::DataSink& sink) {
          if (stopping) return false;
          if (*done) {
            sink.done();
            return true;
          }
          for (const auto& e : svc.events(id, *cursor, 0.25)) {
            std::string frame =
                "id: " + std::to_string(e.seq) + "\ndata: " + event_to_json(e).dump() + "\n\n";
            if (!sink.write(frame.data(), frame.size())) return false;
            *cursor = e.seq;
            if (e.kind == "final_answer" || e.kind == "error") {
              *done = true;
              break;
            }
          }
          if (!sink.is_writable()) return false;
          if (*done) sink.done();
          return true;
        });
  });

  server.Post("/datasets", [&svc](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) {
      return reply_error(res, 400, "BadRequest", "expected multipart/form-data");
    }
    std::string dataset_id;
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& [field, part] : req.files) {
      if (part.filename.empty()) {
        if (field == "dataset_id") dataset_id = part.content;
      } else {
        files.emplace_back(part.filename, part.content);
      }
    }
    if (dataset_id.empty()) return reply_error(res, 400, "BadRequest", "missing field 'dataset_id'");
    try {
      auto src = svc.upload_dataset(dataset_id, files);
      auto records = scan(src, *svc.datasets().extractor()).size();
      reply(res, 201, {{"dataset_id", src.id}, {"records", records}, {"schema", src.detected_schema->name()}});
    } catch (const Error& e) {
      reply_error(res, 400, std::string(to_string(e.code())), e.what());
    }
  });

  server.Get(R"(/sessions/([^/]+)/pipeline)", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!svc.has_session(id)) return reply_error(res, 404, "UnknownSession", "no session '" + id + "'");
    reply(res, 200, svc.pipeline(id));
  });

  server.Get(R"(/sessions/([^/]+)/results)", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!svc.has_session(id)) return reply_error(res, 404, "UnknownSession", "no session '" + id + "'");
    long long offset = 0;
    long long limit = 50;
    try {
      if (req.has_param("offset")) offset = std::stoll(req.get_param_value("offset"));
      if (req.has_param("limit")) limit = std::stoll(req.get_param_value("limit"));
    } catch (const std::exception&) {
      return reply_error(res, 400, "BadRequest", "offset and limit must be integers");
    }
    if (offset < 0 || limit < 1 || limit > 1000) {
      return reply_error(res, 400, "BadRequest", "need offset >= 0 and 1 <= limit <= 1000");
    }
    reply(res, 200, svc.results(id, static_cast<std::size_t>(offset), static_cast<std::size_t>(limit)));
  });

  server.Get(R"(/sessions/([^/]+)/stats)", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!svc.has_session(id)) return reply_error(res, 404, "UnknownSession", "no session '" + id + "'");
    auto stats = svc.stats(id);
    if (!stats) return reply_error(res, 409, "NotExecuted", "the pipeline has not been executed yet");
    reply(res, 200, *stats);
  });

  server.Get(R"(/sessions/([^/]+)/export)", [&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!svc.has_session(id)) return reply_error(res, 404, "UnknownSession", "no session '" + id + "'");
    try {
      auto bundle = svc.export_bundle(id);
      reply(res, 200, {{"pipeline_file", bundle.pipeline_file}, {"script", bundle.script}});
    } catch (const Error& e) {
      reply_error(res, 409, std::string(to_string(e.code())), e.what());
    }
  });
}

}  // namespace semflow
