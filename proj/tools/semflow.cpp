#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "semflow/cli.hpp"
#include "semflow/error.hpp"
#include "semflow/service.hpp"

namespace {

semflow::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semflow: declarative document pipelines over language models"};
  app.require_subcommand(1);

  semflow::RunOptions run;
  std::string policy;
  auto* run_cmd = app.add_subcommand("run", "Execute a pipeline file");
  run_cmd->add_option("--pipeline", run.pipeline, "Pipeline file")->required();
  run_cmd->add_option("--policy", policy, "Policy JSON, overrides the file");
  run_cmd->add_option("--catalog", run.catalog, "Model catalog JSON");
  run_cmd->add_option("--mock-rules", run.mock_rules, "Mock provider rules JSON");
  run_cmd->add_option("--out", run.out, "Write records here instead of stdout");
  run_cmd->add_option("--stats-out", run.stats_out, "Write execution stats here");
  run_cmd->add_flag("--explain", run.explain, "Print the plan table, do not execute");
  run_cmd->add_option("--workers", run.workers, "Worker threads per operator")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--datasets", run.datasets, "Dataset registry JSON");
  run_cmd->add_option("--data-root", run.data_root, "Directory holding <source>/ datasets");

  std::string config_path;
  std::string listen;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", config_path, "Service config JSON")->required();
  serve_cmd->add_option("--listen", listen, "host:port, overrides the config");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) {
    if (!policy.empty()) run.policy_json = policy;
    return semflow::run_command(run, std::cout, std::cerr);
  }

  try {
    auto config = semflow::ServiceConfig::load(config_path);
    if (!listen.empty()) {
      auto colon = listen.rfind(':');
      if (colon == std::string::npos) {
        std::cerr << "--listen must be host:port\n";
        return 1;
      }
      config.host = listen.substr(0, colon);
      config.port = std::stoi(listen.substr(colon + 1));
    }
    auto service = semflow::Service::from_config(config);
    g_service = service.get();
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    if (service->bind() < 0) {
      std::cerr << "cannot bind " << config.host << ":" << config.port << "\n";
      return 1;
    }
    std::cerr << "listening on " << config.host << ":" << service->port() << "\n";
    service->listen_after_bind();
    g_service = nullptr;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
