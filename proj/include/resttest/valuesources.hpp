#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resttest/agents.hpp"
#include "resttest/json.hpp"
#include "resttest/oasmodel.hpp"
#include "resttest/spdg.hpp"

namespace resttest {

// --- defaults ---------------------------------------------------------------------

// Schema-driven value: example, else a random enum member, else a random
// value of the schema kind that respects min/max and length bounds.
Json default_value(const SchemaNode& schema, Rng& rng);

// True when `value` has the schema's kind and satisfies its enum, min/max
// and length constraints (recursively for arrays and objects).
bool conforms(const Json& value, const SchemaNode& schema);

// --- dependency store ---------------------------------------------------------------

inline constexpr std::size_t kStoreCapacity = 50;

// Values observed in successful exchanges, per operation and field path.
// Each history is a FIFO bounded by `capacity`.
class ResponseStore {
 public:
  explicit ResponseStore(std::size_t capacity = kStoreCapacity) : capacity_(capacity) {}

  void record(const std::string& operation_id, const std::string& field, Json value);
  const std::deque<Json>& history(std::string_view operation_id,
                                  std::string_view field) const;
  bool empty() const;
  std::size_t capacity() const { return capacity_; }
  // Every (operation, field) history, for random dependency substitution.
  std::vector<const std::deque<Json>*> all_histories() const;

 private:
  std::size_t capacity_;
  std::map<std::string, std::map<std::string, std::deque<Json>, std::less<>>, std::less<>>
      values_;
};

// Uniform pick from the producer's history; nullopt when empty.
std::optional<Json> dependency_value(const DependencyEdge& edge, const ResponseStore& store,
                                     Rng& rng);

// Values at a dotted path inside a JSON document (arrays are traversed).
std::vector<Json> extract_path(const Json& document, std::string_view path);

// --- LLM --------------------------------------------------------------------------

struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o-mini";
  double temperature = 0.7;
  int max_tokens = 1024;
  std::string api_key;
  // Currency units per token; negative selects the built-in price for known models.
  double price_per_input_token = -1.0;
  double price_per_output_token = -1.0;
  double timeout_seconds = 30.0;
};

struct ModelPrice {
  double input = 0.0;
  double output = 0.0;
};

// USD per token for gpt-4o, gpt-4o-mini, o1 and o1-mini; nullopt otherwise.
std::optional<ModelPrice> builtin_price(std::string_view model_name);
ModelPrice effective_price(const LlmConfig& cfg);

struct TokenUsage {
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
};

struct TargetField {
  std::string path;
  SchemaNode schema;
};

struct ValueRequest {
  const OperationSpec* operation = nullptr;
  std::vector<TargetField> target_fields;
  std::vector<int> prior_statuses;
};

struct LlmResult {
  std::map<std::string, Json> values;
  TokenUsage usage;
};

// Chat-completions request body for a value request.
Json build_llm_request(const ValueRequest& req, const LlmConfig& cfg);
// Single user-message prompt listing the target fields.
std::string build_llm_prompt(const ValueRequest& req);

// Coerces a reply value to the schema kind; nullopt if impossible.
std::optional<Json> coerce_value(const Json& value, const SchemaNode& schema);

// Parses the assistant message content (a JSON object field -> value).
// Unknown fields are dropped and non-coercible values omitted. Throws
// MalformedLlmReply.
std::map<std::string, Json> parse_llm_content(std::string_view content,
                                              const ValueRequest& req);

// POSTs to <base_url>/chat/completions. Throws LlmUnavailable or
// MalformedLlmReply.
LlmResult llm_generate(const ValueRequest& req, const LlmConfig& cfg);

// Running LLM spend.
class CostTracker {
 public:
  double track(const TokenUsage& usage, const LlmConfig& cfg);
  double total() const { return total_; }
  const TokenUsage& tokens() const { return tokens_; }

 private:
  double total_ = 0.0;
  TokenUsage tokens_;
};

double track_cost(CostTracker& tracker, const TokenUsage& usage, const LlmConfig& cfg);

}  // namespace resttest
