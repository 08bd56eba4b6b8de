#include "resttest/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include "resttest/errors.hpp"
#include "resttest/persistence.hpp"

namespace resttest {

namespace {

using Target = std::variant<std::string*, double*, int*, bool*, std::uint64_t*,
                            std::optional<std::uint64_t>*>;

struct Field {
  std::string_view key;
  std::function<Target(RunConfig&)> bind;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      {"spec_path", [](RunConfig& c) -> Target { return &c.spec_path; }},
      {"server_url", [](RunConfig& c) -> Target { return &c.server_url; }},
      {"embedding_path", [](RunConfig& c) -> Target { return &c.embedding_path; }},
      {"similarity_threshold", [](RunConfig& c) -> Target { return &c.similarity_threshold; }},
      {"fallback_k", [](RunConfig& c) -> Target { return &c.fallback_k; }},
      {"llm_enabled", [](RunConfig& c) -> Target { return &c.llm_enabled; }},
      {"llm_base_url", [](RunConfig& c) -> Target { return &c.llm.base_url; }},
      {"llm_model", [](RunConfig& c) -> Target { return &c.llm.model_name; }},
      {"llm_temperature", [](RunConfig& c) -> Target { return &c.llm.temperature; }},
      {"llm_max_tokens", [](RunConfig& c) -> Target { return &c.llm.max_tokens; }},
      {"llm_price_per_input_token",
       [](RunConfig& c) -> Target { return &c.llm.price_per_input_token; }},
      {"llm_price_per_output_token",
       [](RunConfig& c) -> Target { return &c.llm.price_per_output_token; }},
      {"llm_timeout_seconds", [](RunConfig& c) -> Target { return &c.llm.timeout_seconds; }},
      {"cache_enabled", [](RunConfig& c) -> Target { return &c.cache_enabled; }},
      {"cache_dir", [](RunConfig& c) -> Target { return &c.cache_dir; }},
      {"learning_rate", [](RunConfig& c) -> Target { return &c.learning_rate; }},
      {"discount", [](RunConfig& c) -> Target { return &c.discount; }},
      {"epsilon_initial", [](RunConfig& c) -> Target { return &c.epsilon.initial; }},
      {"epsilon_decay", [](RunConfig& c) -> Target { return &c.epsilon.decay; }},
      {"epsilon_floor", [](RunConfig& c) -> Target { return &c.epsilon.floor; }},
      {"duration_seconds", [](RunConfig& c) -> Target { return &c.duration_seconds; }},
      {"max_requests", [](RunConfig& c) -> Target { return &c.max_requests; }},
      {"mutation_rate", [](RunConfig& c) -> Target { return &c.mutation.mutation_rate; }},
      {"mutation_weight_type_alteration",
       [](RunConfig& c) -> Target { return &c.mutation.weights[0]; }},
      {"mutation_weight_name_mutation",
       [](RunConfig& c) -> Target { return &c.mutation.weights[1]; }},
      {"mutation_weight_media_type_change",
       [](RunConfig& c) -> Target { return &c.mutation.weights[2]; }},
      {"mutation_weight_random_dependency",
       [](RunConfig& c) -> Target { return &c.mutation.weights[3]; }},
      {"mutation_weight_token_change",
       [](RunConfig& c) -> Target { return &c.mutation.weights[4]; }},
      {"request_timeout_seconds",
       [](RunConfig& c) -> Target { return &c.request_timeout_seconds; }},
      {"output_dir", [](RunConfig& c) -> Target { return &c.output_dir; }},
      {"seed", [](RunConfig& c) -> Target { return &c.seed; }},
      {"baseline_mode", [](RunConfig& c) -> Target { return &c.baseline_mode; }},
      {"max_ref_depth", [](RunConfig& c) -> Target { return &c.max_ref_depth; }},
      {"progress_interval_seconds",
       [](RunConfig& c) -> Target { return &c.progress_interval_seconds; }},
      {"dump_graph", [](RunConfig& c) -> Target { return &c.dump_graph; }},
  };
  return kFields;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

template <typename T>
bool convert(const YAML::Node& node, T& out) {
  if (!node.IsScalar()) return false;
  try {
    out = node.as<T>();
    return true;
  } catch (const YAML::Exception&) {
    return false;
  }
}

// Assigns one YAML value; returns a violation message on failure.
std::optional<std::string> assign(RunConfig& config, const Field& field, const YAML::Node& node) {
  std::string key(field.key);
  return std::visit(
      [&](auto* target) -> std::optional<std::string> {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (node.IsNull()) {
            target->clear();
            return std::nullopt;
          }
          if (!convert(node, *target)) return key + ": expected a string";
        } else if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
          if (node.IsNull()) {
            target->reset();
            return std::nullopt;
          }
          std::uint64_t v = 0;
          if (!convert(node, v)) return key + ": expected a non-negative integer";
          *target = v;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (!convert(node, *target)) return key + ": expected true or false";
        } else if constexpr (std::is_same_v<T, double>) {
          if (!convert(node, *target)) return key + ": expected a number";
        } else {
          if (!convert(node, *target)) return key + ": expected an integer";
        }
        return std::nullopt;
      },
      field.bind(config));
}

void apply_mapping(RunConfig& config, const YAML::Node& root, std::vector<std::string>& errors) {
  if (!root || root.IsNull()) return;
  if (!root.IsMap()) {
    errors.push_back("config file must be a mapping of key: value pairs");
    return;
  }
  for (const auto& entry : root) {
    std::string key = entry.first.as<std::string>();
    const Field* field = find_field(key);
    if (!field) {
      errors.push_back(key + ": unknown configuration key");
      continue;
    }
    if (auto error = assign(config, *field, entry.second)) errors.push_back(*error);
  }
}

void apply_overrides(RunConfig& config, const ConfigOverrides& overrides,
                     std::vector<std::string>& errors) {
  for (const auto& [key, text] : overrides) {
    const Field* field = find_field(key);
    if (!field) {
      errors.push_back(key + ": unknown configuration key");
      continue;
    }
    Target target = field->bind(config);
    if (auto* s = std::get_if<std::string*>(&target)) {
      **s = text;
      continue;
    }
    YAML::Node node;
    try {
      node = YAML::Load(text);
    } catch (const YAML::Exception&) {
      errors.push_back(key + ": cannot parse '" + text + "'");
      continue;
    }
    if (auto error = assign(config, *field, node)) errors.push_back(*error);
  }
}

RunConfig finish(RunConfig config, std::vector<std::string> errors, bool require_spec) {
  for (auto& violation : validate_config(config, require_spec)) {
    if (std::find(errors.begin(), errors.end(), violation) == errors.end()) {
      errors.push_back(std::move(violation));
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

}  // namespace

RunConfig load_config_text(const std::string& yaml, const ConfigOverrides& overrides,
                           bool require_spec) {
  RunConfig config;
  std::vector<std::string> errors;
  try {
    apply_mapping(config, YAML::Load(yaml), errors);
  } catch (const YAML::Exception& e) {
    errors.push_back(std::string("config file: ") + e.what());
  }
  apply_overrides(config, overrides, errors);
  return finish(std::move(config), std::move(errors), require_spec);
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const ConfigOverrides& overrides, bool require_spec) {
  if (!file) return load_config_text("", overrides, require_spec);
  std::ifstream in(*file);
  if (!in) throw ConfigError({"cannot read config file " + file->string()});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_config_text(buffer.str(), overrides, require_spec);
}

std::vector<std::string> validate_config(const RunConfig& c, bool require_spec) {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };
  auto unit = [&](double v, const char* key) {
    check(v >= 0.0 && v <= 1.0, std::string(key) + ": must be within [0, 1]");
  };
  if (require_spec) check(!c.spec_path.empty(), "spec_path: required (pass --spec)");
  check(!c.embedding_path.empty(), "embedding_path: must not be empty");
  check(c.similarity_threshold >= -1.0 && c.similarity_threshold <= 1.0,
        "similarity_threshold: must be within [-1, 1]");
  check(c.fallback_k >= 0, "fallback_k: must be >= 0");
  check(c.llm.temperature >= 0.0 && c.llm.temperature <= 2.0,
        "llm_temperature: must be within [0, 2]");
  check(c.llm.max_tokens > 0, "llm_max_tokens: must be > 0");
  check(c.llm.timeout_seconds > 0.0, "llm_timeout_seconds: must be > 0");
  check(c.learning_rate > 0.0 && c.learning_rate <= 1.0,
        "learning_rate: must be within (0, 1]");
  unit(c.discount, "discount");
  unit(c.epsilon.initial, "epsilon_initial");
  check(c.epsilon.decay > 0.0 && c.epsilon.decay <= 1.0,
        "epsilon_decay: must be within (0, 1]");
  unit(c.epsilon.floor, "epsilon_floor");
  check(c.duration_seconds > 0.0, "duration_seconds: must be > 0");
  unit(c.mutation.mutation_rate, "mutation_rate");
  static constexpr const char* kWeightKeys[] = {
      "mutation_weight_type_alteration", "mutation_weight_name_mutation",
      "mutation_weight_media_type_change", "mutation_weight_random_dependency",
      "mutation_weight_token_change"};
  for (std::size_t i = 0; i < kMutationCategories; ++i) {
    check(c.mutation.weights[i] >= 0.0, std::string(kWeightKeys[i]) + ": must be >= 0");
  }
  check(c.request_timeout_seconds > 0.0, "request_timeout_seconds: must be > 0");
  check(!c.output_dir.empty(), "output_dir: must not be empty");
  check(c.max_ref_depth >= 1, "max_ref_depth: must be >= 1");
  check(c.progress_interval_seconds > 0.0, "progress_interval_seconds: must be > 0");
  return errors;
}

Json config_to_json(const RunConfig& config) {
  RunConfig copy = config;
  Json out = Json::object();
  for (const auto& field : fields()) {
    std::string key(field.key);
    std::visit(
        [&](auto* target) {
          using T = std::remove_pointer_t<decltype(target)>;
          if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
            out[key] = *target ? Json(**target) : Json(nullptr);
          } else {
            out[key] = *target;
          }
        },
        field.bind(copy));
  }
  return out;
}

std::string graph_config_digest(const RunConfig& c) {
  Json key = {{"embedding_path", c.embedding_path},
              {"similarity_threshold", c.similarity_threshold},
              {"fallback_k", c.fallback_k},
              {"max_ref_depth", c.max_ref_depth}};
  return sha256_hex(key.dump());
}

std::string llm_config_digest(const RunConfig& c) {
  Json key = {{"llm_base_url", c.llm.base_url},
              {"llm_model", c.llm.model_name},
              {"llm_temperature", c.llm.temperature},
              {"llm_max_tokens", c.llm.max_tokens},
              {"max_ref_depth", c.max_ref_depth}};
  return sha256_hex(key.dump());
}

}  // namespace resttest
