#pragma once

#include <array>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resttest/agents.hpp"
#include "resttest/json.hpp"
#include "resttest/oasmodel.hpp"
#include "resttest/reporting.hpp"
#include "resttest/spdg.hpp"
#include "resttest/valuesources.hpp"

namespace resttest {

enum class ValueSource { Llm, Dependency, Default };

std::string_view to_string(ValueSource source);

struct FieldAssignment {
  std::string path;  // ValueField::path
  ValueSource source = ValueSource::Default;
  Json value;
  std::optional<std::string> edge_id;
};

// Everything the agents decided for one episode.
struct RequestPlan {
  std::string operation_id;
  std::vector<std::string> included_items;  // SelectableItem labels
  std::vector<FieldAssignment> fields;
  std::string header_choice = std::string(kNoAuth);
  std::optional<std::string> bearer_token;
  std::string media_type;
  std::vector<Decision> provenance;
};

struct NamedValue {
  std::string name;
  Json value;
  bool from_dependency = false;
};

// Structured request prior to serialization; mutations operate on this.
struct RequestDraft {
  std::string operation_id;
  HttpMethod method = HttpMethod::Get;
  std::string base_url;
  std::string path_template;
  std::vector<NamedValue> path_params;
  std::vector<NamedValue> query_params;
  std::vector<NamedValue> header_params;
  std::vector<NamedValue> cookie_params;
  std::optional<Json> body;
  std::string content_type;  // meaningful only with a body
  std::string accept = "application/json";
  std::optional<std::string> bearer_token;
  std::vector<std::string> dependency_body_paths;

  bool operator==(const RequestDraft&) const;
};

struct WireRequest {
  HttpMethod method = HttpMethod::Get;
  std::string url;     // absolute
  std::string target;  // path + query, relative to the origin
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type;
};

// Text used for a scalar in a URL or header (strings unquoted).
std::string scalar_text(const Json& value);

// Places `value` at a dotted body path, creating objects on the way and
// entering the first element of arrays declared by `schema`.
void set_body_path(Json& body, std::string_view path, const Json& value,
                   const SchemaNode& schema);

// Throws MissingPathParam.
RequestDraft build_request(const RequestPlan& plan, const ApiModel& model);
WireRequest render_request(const RequestDraft& draft);
std::string serialize_body(const Json& body, std::string_view content_type);

enum class MutationCategory {
  TypeAlteration,
  NameMutation,
  MediaTypeChange,
  RandomDependency,
  TokenChange,
};

inline constexpr std::size_t kMutationCategories = 5;
std::string_view to_string(MutationCategory category);

inline constexpr std::array<std::string_view, 3> kMutationMediaTypes = {
    "application/json", "text/plain", "application/x-www-form-urlencoded"};

struct MutationConfig {
  double mutation_rate = 0.2;
  std::array<double, kMutationCategories> weights{1.0, 1.0, 1.0, 1.0, 1.0};
};

struct MutationResult {
  RequestDraft request;
  std::vector<std::string> log;
};

// With probability mutation_rate applies one category (weighted over the
// applicable ones); otherwise returns the request untouched.
MutationResult mutate_request(const RequestDraft& request, const MutationConfig& cfg,
                              Rng& rng, const ResponseStore* store = nullptr);

// Sends requests over keep-alive connections, one client per origin.
class HttpDispatcher {
 public:
  explicit HttpDispatcher(std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~HttpDispatcher();
  HttpDispatcher(const HttpDispatcher&) = delete;
  HttpDispatcher& operator=(const HttpDispatcher&) = delete;

  // Never throws for transport failures; they come back as status 0.
  HttpExchange send(const WireRequest& request, std::string_view operation_id = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HttpExchange send_request(const WireRequest& request, std::chrono::milliseconds timeout,
                          std::string_view operation_id = {});

// Replaces with '#' every hex-character run that contains a digit, and
// every all-hex word of 8+ characters.
std::string normalize_error_body(std::string_view body);
std::string dedup_key(std::string_view operation_id, int status, std::string_view body);

// Bearer tokens obtained from account operations, by operation id.
using TokenStore = std::map<std::string, std::string, std::less<>>;

struct HandleContext {
  RunState& run;
  ResponseStore& store;
  Spdg& graph;
  AgentSet* agents = nullptr;  // null: no learning (baseline)
  const ApiModel& model;
  TokenStore* tokens = nullptr;
  RewardRule rule{};
};

struct Outcome {
  StatusClass status_class = StatusClass::Other;
  bool transport_error = false;
  bool newly_unique_error = false;
  bool newly_successful_operation = false;
};

// Updates counters and stores, captures tokens, records dependency-edge
// observations and delegates rewards. `sent` is the request as dispatched.
Outcome handle_response(const HttpExchange& exchange, const RequestPlan& plan,
                        const RequestDraft& sent, HandleContext& ctx);

}  // namespace resttest
