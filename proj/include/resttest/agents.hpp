#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "resttest/json.hpp"
#include "resttest/oasmodel.hpp"
#include "resttest/spdg.hpp"

namespace resttest {

using Rng = std::mt19937_64;

inline constexpr double kDefaultLearningRate = 0.1;
inline constexpr double kDefaultDiscount = 0.9;

// Tabular Q-function. Every (state, action) starts at zero; states are
// registered with their full action list up front.
class QTable {
 public:
  explicit QTable(double learning_rate = kDefaultLearningRate,
                  double discount = kDefaultDiscount);

  double learning_rate() const { return learning_rate_; }
  double discount() const { return discount_; }

  void add_state(const std::string& state, std::vector<std::string> actions);
  bool has_state(std::string_view state) const;
  // Empty for unknown states.
  const std::vector<std::string>& actions(std::string_view state) const;
  const std::vector<double>& values(std::string_view state) const;

  // Throws UnknownStateAction.
  double value(std::string_view state, std::string_view action) const;
  void set_value(std::string_view state, std::string_view action, double q);
  // 0 when the state is unknown or has no actions.
  double max_value(std::string_view state) const;

  // q += lr * (reward + discount * max_a' Q(next_state, a') - q); returns q.
  // Throws UnknownStateAction.
  double update(std::string_view state, std::string_view action, double reward,
                std::string_view next_state);

  std::size_t state_count() const { return rows_.size(); }
  // {state: {action: q}} with lexicographic keys.
  Json to_json() const;

 private:
  struct Row {
    std::vector<std::string> actions;
    std::vector<double> values;
    std::unordered_map<std::string, std::size_t> index;
  };
  const Row* row(std::string_view state) const;
  std::size_t slot(const Row& row, std::string_view state, std::string_view action) const;

  double learning_rate_;
  double discount_;
  std::map<std::string, Row, std::less<>> rows_;
};

// Epsilon-greedy: uniform over actions with probability epsilon, otherwise
// argmax with uniform tie-breaking. Throws NoActions.
const std::string& select_action(const QTable& table, std::string_view state,
                                 double epsilon, Rng& rng);

// Free-function form of QTable::update.
double update_q(QTable& table, std::string_view state, std::string_view action,
                double reward, std::string_view next_state);

struct EpsilonSchedule {
  double initial = 1.0;
  double decay = 0.999;  // per episode
  double floor = 0.05;
};

// max(floor, initial * decay^episode)
double decay_epsilon(const EpsilonSchedule& schedule, std::uint64_t episode);

enum class AgentKind { Operation, Parameter, Value, Dependency, Header };

std::string_view to_string(AgentKind kind);

enum class StatusClass { Informational, Success, Redirect, ClientError, ServerError, Other };

StatusClass classify_status(int status);

// Operation agent earns `rewarded` on 4xx/5xx; every other agent earns it on
// 2xx. Anything else earns `penalty`.
struct RewardRule {
  double rewarded = 1.0;
  double penalty = -1.0;

  double reward(AgentKind agent, int status) const;
};

// Value sources available to the value agent.
inline constexpr std::string_view kSourceLlm = "LLM";
inline constexpr std::string_view kSourceDependency = "DEPENDENCY";
inline constexpr std::string_view kSourceDefault = "DEFAULT";

inline constexpr std::string_view kNoAuth = "NO_AUTH";
inline constexpr std::string_view kTokenPrefix = "TOKEN:";
inline constexpr std::string_view kGlobalState = "global";
inline constexpr std::string_view kInclude = "include";
inline constexpr std::string_view kExclude = "exclude";

// Operations with more selectable items than this use per-item
// include/exclude tables instead of enumerating every subset.
inline constexpr std::size_t kMaxEnumeratedItems = 10;

// A parameter or top-level request-body property the parameter agent can pick.
struct SelectableItem {
  std::string label;  // unique within the operation
  bool is_body = false;
  std::string name;  // parameter name or body property name
  std::optional<ParamLocation> location;
  bool required = false;
};

// One leaf the value agent assigns. `path` matches list_io_fields() input
// paths (and SPDG consumer fields); `body_path` is the location inside the
// request body for body fields.
struct ValueField {
  std::string path;
  std::size_t item = 0;  // index into OperationAgentInfo::items
  std::string body_path;
  SchemaNode schema;
};

struct OperationAgentInfo {
  std::vector<SelectableItem> items;
  std::vector<ValueField> value_fields;
  bool per_item = false;          // items.size() > kMaxEnumeratedItems
  bool body_is_array = false;     // body is an array of the item object
  bool primitive_body = false;    // body is a single non-object value
};

// Items and value fields of one operation.
OperationAgentInfo describe_operation(const OperationSpec& op);

struct AgentConfig {
  double learning_rate = kDefaultLearningRate;
  double discount = kDefaultDiscount;
  bool llm_enabled = true;
};

struct AgentSet {
  QTable operation;
  QTable parameter;
  QTable value;
  QTable dependency;
  QTable header;
  std::map<std::string, OperationAgentInfo, std::less<>> info;
  std::vector<std::string> account_operations;

  QTable& table(AgentKind kind);
  const QTable& table(AgentKind kind) const;

  // {"operation": ..., "parameter": ..., ...}
  Json to_json() const;
};

std::string field_state(std::string_view operation_id, std::string_view field);
std::string item_state(std::string_view operation_id, std::string_view label);
// "{a,b}" in item order; "{}" for the empty subset.
std::string subset_key(const std::vector<SelectableItem>& items, std::uint64_t mask);
std::uint64_t parse_subset_key(const std::vector<SelectableItem>& items,
                               std::string_view key);

// POST operations whose id/path tokens name an account concept.
bool is_account_operation(const OperationSpec& op);
// First string field of a 2xx response whose name looks like a credential.
std::optional<std::string> token_field(const OperationSpec& op);

AgentSet init_agents(const ApiModel& model, const Spdg& graph,
                     const AgentConfig& config = {});

struct Decision {
  AgentKind agent;
  std::string state;
  std::string action;

  bool operator==(const Decision&) const = default;
};

struct AppliedUpdate {
  AgentKind agent;
  std::string state;
  std::string action;
  double reward = 0.0;
  double new_q = 0.0;
};

// One Bellman update per decision, with next_state equal to the decision's
// own state.
std::vector<AppliedUpdate> delegate_rewards(AgentSet& agents,
                                            const std::vector<Decision>& provenance,
                                            int status, const RewardRule& rule = {});

}  // namespace resttest
