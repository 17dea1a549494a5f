#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "semflow/error.hpp"
#include "semflow/provider.hpp"

namespace semflow {

HttpProviderConfig HttpProviderConfig::from_json(const json& j) {
  HttpProviderConfig cfg;
  try {
    cfg.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model_map")) {
      cfg.model_map = j.at("model_map").get<std::map<std::string, std::string>>();
    }
    cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
    cfg.timeout_s = j.value("timeout_s", cfg.timeout_s);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed provider config: ") + e.what());
  }
  return cfg;
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  const auto& url = config_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ParseError, "provider endpoint '" + url + "' has no scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::ProviderUnavailable, "this build has no TLS support for " + url);
  }
#endif
}

CompletionResponse HttpProvider::complete(const CompletionRequest& request) {
  auto mapped = config_.model_map.find(request.model_id);
  const std::string& model = mapped == config_.model_map.end() ? request.model_id : mapped->second;

  json body = {{"model", model},
               {"temperature", 0},
               {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})}};

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  // Clients are cheap; one per call keeps the provider safe across threads.
  httplib::Client client(scheme_host_port_);
  auto timeout = std::chrono::duration<double>(config_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable,
                "request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::ProviderUnavailable,
                config_.endpoint + " answered HTTP " + std::to_string(res->status));
  }
  try {
    json reply = json::parse(res->body);
    CompletionResponse out;
    out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    if (reply.contains("usage")) {
      const auto& usage = reply.at("usage");
      out.input_tokens = usage.value("prompt_tokens", std::int64_t{0});
      out.output_tokens = usage.value("completion_tokens", std::int64_t{0});
    }
    out.latency_s = latency;
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable,
                "unexpected response from " + config_.endpoint + ": " + e.what());
  }
}

}  // namespace semflow
