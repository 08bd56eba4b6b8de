// Command-line entry point: `run`, `sandbox` and `stub-llm` subcommands.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <iostream>

#include "resttest/config.hpp"
#include "resttest/errors.hpp"
#include "resttest/pipeline.hpp"
#include "resttest/sandbox.hpp"
#include "resttest/stub_llm.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

struct RunFlags {
  std::string config_path;
  bool print_config = false;
  resttest::ConfigOverrides overrides;
};

void add_run_options(CLI::App& run, RunFlags& flags) {
  auto value = [&](const char* name, const char* key, const char* help) {
    run.add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); },
        help);
  };
  auto toggle = [&](const char* name, const char* key, const char* setting, const char* help) {
    run.add_flag_callback(
        name, [&flags, key, setting] { flags.overrides.emplace_back(key, setting); }, help);
  };
  run.add_option("--config", flags.config_path, "YAML file of key: value settings");
  run.add_flag("--print-config", flags.print_config,
               "Print the effective configuration as JSON and exit");
  value("--spec", "spec_path", "OpenAPI 3.0 document (JSON or YAML)");
  value("--duration", "duration_seconds", "Time budget in seconds");
  value("--seed", "seed", "Random seed (default: time-seeded)");
  value("--server-url", "server_url", "Base URL overriding the spec's servers");
  value("--embeddings", "embedding_path", "Word-embedding table (GloVe text format)");
  value("--output-dir", "output_dir", "Directory for the report files");
  value("--cache-dir", "cache_dir", "Directory for cached artifacts");
  value("--mutation-rate", "mutation_rate", "Probability of mutating a request");
  value("--max-requests", "max_requests", "Stop after this many requests (0: no cap)");
  value("--timeout", "request_timeout_seconds", "Per-request timeout in seconds");
  value("--llm-url", "llm_base_url", "Chat-completions base URL");
  value("--llm-model", "llm_model", "LLM model name");
  toggle("--baseline", "baseline_mode", "true", "Uniform random choices, no learning");
  toggle("--dump-graph", "dump_graph", "true", "Write the dependency graph to spdg.json");
  toggle("--no-cache", "cache_enabled", "false", "Do not read or write the cache");
  toggle("--no-llm", "llm_enabled", "false", "Disable the LLM value source");
}

int run_command(const RunFlags& flags) {
  std::optional<std::filesystem::path> file;
  if (!flags.config_path.empty()) file = flags.config_path;
  resttest::RunConfig config;
  try {
    config = resttest::load_config(file, flags.overrides, !flags.print_config);
  } catch (const resttest::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return resttest::kExitSetupFailure;
  }
  if (const char* key = std::getenv("LLM_API_KEY")) config.llm.api_key = key;
  if (flags.print_config) {
    std::cout << resttest::config_to_json(config).dump(2) << '\n';
    return resttest::kExitOk;
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return resttest::run_pipeline(config, {std::cout, std::cerr, &g_stop}).exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent reinforcement-learning REST API tester"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Test the API described by a spec");
  add_run_options(*run, run_flags);

  std::string service_name;
  int sandbox_port = 8090;
  CLI::App* sandbox = app.add_subcommand("sandbox", "Serve a mock API with seeded faults");
  sandbox->add_option("--service", service_name, "market or chain3")
      ->required()
      ->check(CLI::IsMember({"market", "chain3"}));
  sandbox->add_option("--port", sandbox_port, "Port on 127.0.0.1");

  int stub_port = 8099;
  CLI::App* stub = app.add_subcommand("stub-llm", "Serve a canned chat-completions endpoint");
  stub->add_option("--port", stub_port, "Port on 127.0.0.1");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(run_flags);
    if (*sandbox) {
      resttest::SandboxServer server(resttest::make_sandbox_service(service_name));
      std::cout << "Serving " << service_name << " on http://127.0.0.1:" << sandbox_port
                << std::endl;
      server.run(sandbox_port);
      return 0;
    }
    if (*stub) {
      resttest::StubLlmServer server;
      std::cout << "Serving stub LLM on http://127.0.0.1:" << stub_port << "/v1" << std::endl;
      server.run(stub_port);
      return 0;
    }
  } catch (const resttest::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return resttest::kExitSetupFailure;
  }
  return 0;
}
