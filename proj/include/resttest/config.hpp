#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resttest/agents.hpp"
#include "resttest/executor.hpp"
#include "resttest/json.hpp"
#include "resttest/valuesources.hpp"

namespace resttest {

// Every setting of a run. The config file is a flat YAML mapping whose keys
// are the member names below.
struct RunConfig {
  std::string spec_path;
  std::string server_url;  // empty: use the spec's servers[0]
  std::string embedding_path = "embeddings/glove.6B.50d.txt";
  double similarity_threshold = 0.7;
  int fallback_k = 3;

  bool llm_enabled = true;
  LlmConfig llm;

  bool cache_enabled = true;
  std::string cache_dir = "cache/";

  double learning_rate = 0.1;
  double discount = 0.9;
  EpsilonSchedule epsilon;

  double duration_seconds = 300.0;
  std::uint64_t max_requests = 0;  // 0: no cap
  MutationConfig mutation;
  double request_timeout_seconds = 10.0;
  std::string output_dir = "data/";
  std::optional<std::uint64_t> seed;
  bool baseline_mode = false;
  int max_ref_depth = 3;
  double progress_interval_seconds = 2.0;
  bool dump_graph = false;
};

// (key, value) pairs using config-file keys; values are YAML scalars.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// Defaults, then the file (when given), then the overrides. Throws
// ConfigError listing every violation; a missing spec_path is one of them
// when `require_spec` is set.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const ConfigOverrides& overrides, bool require_spec = true);

// Same, reading the file contents from a string.
RunConfig load_config_text(const std::string& yaml, const ConfigOverrides& overrides,
                           bool require_spec = true);

std::vector<std::string> validate_config(const RunConfig& config, bool require_spec);

// All keys in declaration order (the API key is never included).
Json config_to_json(const RunConfig& config);

// Settings that shape the dependency graph, and the LLM values.
std::string graph_config_digest(const RunConfig& config);
std::string llm_config_digest(const RunConfig& config);

}  // namespace resttest
