#include "resttest/agents.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "resttest/embedding.hpp"
#include "resttest/errors.hpp"

namespace resttest {

namespace {

const std::vector<std::string> kEmptyActions;
const std::vector<double> kEmptyValues;

const std::set<std::string, std::less<>> kAccountWords = {
    "login", "signin", "auth", "token", "register", "signup", "account", "user"};
const std::set<std::string, std::less<>> kCredentialWords = {"token", "access", "jwt",
                                                             "key", "session"};

bool mentions(const std::vector<std::string>& tokens,
              const std::set<std::string, std::less<>>& words) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (words.count(t)) return true;
    if (t.size() > 1 && t.back() == 's' && words.count(t.substr(0, t.size() - 1))) {
      return true;
    }
    if (i + 1 < tokens.size() && words.count(t + tokens[i + 1])) return true;
  }
  return false;
}

}  // namespace

// --- QTable -----------------------------------------------------------------------

QTable::QTable(double learning_rate, double discount)
    : learning_rate_(learning_rate), discount_(discount) {}

void QTable::add_state(const std::string& state, std::vector<std::string> actions) {
  Row row;
  row.values.assign(actions.size(), 0.0);
  for (std::size_t i = 0; i < actions.size(); ++i) row.index.emplace(actions[i], i);
  row.actions = std::move(actions);
  rows_[state] = std::move(row);
}

const QTable::Row* QTable::row(std::string_view state) const {
  auto it = rows_.find(state);
  return it == rows_.end() ? nullptr : &it->second;
}

std::size_t QTable::slot(const Row& row, std::string_view state,
                         std::string_view action) const {
  auto it = row.index.find(std::string(action));
  if (it == row.index.end()) {
    throw UnknownStateAction("unknown action '" + std::string(action) + "' in state '" +
                             std::string(state) + "'");
  }
  return it->second;
}

bool QTable::has_state(std::string_view state) const { return row(state) != nullptr; }

const std::vector<std::string>& QTable::actions(std::string_view state) const {
  const Row* r = row(state);
  return r ? r->actions : kEmptyActions;
}

const std::vector<double>& QTable::values(std::string_view state) const {
  const Row* r = row(state);
  return r ? r->values : kEmptyValues;
}

double QTable::value(std::string_view state, std::string_view action) const {
  const Row* r = row(state);
  if (!r) throw UnknownStateAction("unknown state '" + std::string(state) + "'");
  return r->values[slot(*r, state, action)];
}

void QTable::set_value(std::string_view state, std::string_view action, double q) {
  auto it = rows_.find(state);
  if (it == rows_.end()) throw UnknownStateAction("unknown state '" + std::string(state) + "'");
  it->second.values[slot(it->second, state, action)] = q;
}

double QTable::max_value(std::string_view state) const {
  const Row* r = row(state);
  if (!r || r->values.empty()) return 0.0;
  return *std::max_element(r->values.begin(), r->values.end());
}

double QTable::update(std::string_view state, std::string_view action, double reward,
                      std::string_view next_state) {
  auto it = rows_.find(state);
  if (it == rows_.end()) throw UnknownStateAction("unknown state '" + std::string(state) + "'");
  Row& r = it->second;
  std::size_t i = slot(r, state, action);
  double target = reward + discount_ * max_value(next_state);
  r.values[i] += learning_rate_ * (target - r.values[i]);
  return r.values[i];
}

Json QTable::to_json() const {
  Json out = Json::object();
  for (const auto& [state, r] : rows_) {
    std::vector<std::size_t> order(r.actions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return r.actions[a] < r.actions[b]; });
    Json row = Json::object();
    for (std::size_t i : order) row[r.actions[i]] = r.values[i];
    out[state] = std::move(row);
  }
  return out;
}

const std::string& select_action(const QTable& table, std::string_view state,
                                 double epsilon, Rng& rng) {
  const auto& actions = table.actions(state);
  if (actions.empty()) throw NoActions("no actions for state '" + std::string(state) + "'");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
    return actions[pick(rng)];
  }
  const auto& values = table.values(state);
  double best = *std::max_element(values.begin(), values.end());
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == best) ties.push_back(i);
  }
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return actions[ties[pick(rng)]];
}

double update_q(QTable& table, std::string_view state, std::string_view action,
                double reward, std::string_view next_state) {
  return table.update(state, action, reward, next_state);
}

double decay_epsilon(const EpsilonSchedule& schedule, std::uint64_t episode) {
  double eps = schedule.initial * std::pow(schedule.decay, static_cast<double>(episode));
  return std::max(schedule.floor, eps);
}

// --- rewards ------------------------------------------------------------------------

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Operation: return "operation";
    case AgentKind::Parameter: return "parameter";
    case AgentKind::Value: return "value";
    case AgentKind::Dependency: return "dependency";
    case AgentKind::Header: return "header";
  }
  return "operation";
}

StatusClass classify_status(int status) {
  if (status >= 100 && status < 200) return StatusClass::Informational;
  if (status >= 200 && status < 300) return StatusClass::Success;
  if (status >= 300 && status < 400) return StatusClass::Redirect;
  if (status >= 400 && status < 500) return StatusClass::ClientError;
  if (status >= 500 && status < 600) return StatusClass::ServerError;
  return StatusClass::Other;
}

double RewardRule::reward(AgentKind agent, int status) const {
  StatusClass cls = classify_status(status);
  bool hit = agent == AgentKind::Operation
                 ? (cls == StatusClass::ClientError || cls == StatusClass::ServerError)
                 : cls == StatusClass::Success;
  return hit ? rewarded : penalty;
}

// --- agent set ------------------------------------------------------------------------

QTable& AgentSet::table(AgentKind kind) {
  return const_cast<QTable&>(std::as_const(*this).table(kind));
}

const QTable& AgentSet::table(AgentKind kind) const {
  switch (kind) {
    case AgentKind::Operation: return operation;
    case AgentKind::Parameter: return parameter;
    case AgentKind::Value: return value;
    case AgentKind::Dependency: return dependency;
    case AgentKind::Header: return header;
  }
  return operation;
}

Json AgentSet::to_json() const {
  Json out = Json::object();
  for (auto kind : {AgentKind::Dependency, AgentKind::Header, AgentKind::Operation,
                    AgentKind::Parameter, AgentKind::Value}) {
    out[std::string(to_string(kind))] = table(kind).to_json();
  }
  return out;
}

std::string field_state(std::string_view operation_id, std::string_view field) {
  std::string s(operation_id);
  s += '|';
  s += field;
  return s;
}

std::string item_state(std::string_view operation_id, std::string_view label) {
  std::string s(operation_id);
  s += "|item:";
  s += label;
  return s;
}

std::string subset_key(const std::vector<SelectableItem>& items, std::uint64_t mask) {
  std::string key = "{";
  bool first = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!(mask & (std::uint64_t{1} << i))) continue;
    if (!first) key += ',';
    key += items[i].label;
    first = false;
  }
  key += '}';
  return key;
}

std::uint64_t parse_subset_key(const std::vector<SelectableItem>& items,
                               std::string_view key) {
  std::uint64_t mask = 0;
  if (key.size() < 2) return mask;
  std::string_view inner = key.substr(1, key.size() - 2);
  std::size_t pos = 0;
  while (pos <= inner.size() && !inner.empty()) {
    std::size_t comma = inner.find(',', pos);
    std::string_view label =
        inner.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                          : comma - pos);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].label == label) mask |= std::uint64_t{1} << i;
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return mask;
}

OperationAgentInfo describe_operation(const OperationSpec& op) {
  OperationAgentInfo info;
  std::set<std::string> labels;
  auto unique_label = [&](const std::string& name, std::string_view prefix) {
    std::string label = name;
    if (labels.count(label)) label = std::string(prefix) + ":" + name;
    labels.insert(label);
    return label;
  };

  for (const auto& p : op.parameters) {
    info.items.push_back(SelectableItem{.label = unique_label(p.name, to_string(p.location)),
                                        .is_body = false,
                                        .name = p.name,
                                        .location = p.location,
                                        .required = p.required});
    info.value_fields.push_back(ValueField{
        .path = p.name, .item = info.items.size() - 1, .body_path = {}, .schema = p.schema});
  }

  if (op.request_body) {
    const SchemaNode& body = op.request_body->preferred().schema;
    const SchemaNode* root = &body;
    if (body.kind == SchemaKind::Array && body.items &&
        body.items->kind == SchemaKind::Object) {
      root = body.items.get();
      info.body_is_array = true;
    }
    if (root->kind == SchemaKind::Object) {
      std::size_t first_body_item = info.items.size();
      for (const auto& [name, child] : root->properties) {
        info.items.push_back(SelectableItem{.label = unique_label(name, "body"),
                                            .is_body = true,
                                            .name = name,
                                            .location = std::nullopt,
                                            .required = root->is_required(name)});
      }
      for (const auto& [path, schema] : flatten_schema(body)) {
        std::string top = path.substr(0, path.find('.'));
        std::size_t item = first_body_item;
        for (std::size_t i = first_body_item; i < info.items.size(); ++i) {
          if (info.items[i].name == top) item = i;
        }
        bool clash = op.parameter(path) != nullptr;
        info.value_fields.push_back(ValueField{.path = clash ? "body." + path : path,
                                               .item = item,
                                               .body_path = path,
                                               .schema = *schema});
      }
    } else {
      info.primitive_body = true;
      info.items.push_back(SelectableItem{.label = unique_label("body", "body"),
                                          .is_body = true,
                                          .name = "body",
                                          .location = std::nullopt,
                                          .required = op.request_body->required});
      info.value_fields.push_back(ValueField{.path = info.items.back().label,
                                             .item = info.items.size() - 1,
                                             .body_path = {},
                                             .schema = body});
    }
  }
  info.per_item = info.items.size() > kMaxEnumeratedItems;
  return info;
}

bool is_account_operation(const OperationSpec& op) {
  if (op.method != HttpMethod::Post) return false;
  return mentions(tokenize_identifier(op.id), kAccountWords) ||
         mentions(tokenize_identifier(op.path), kAccountWords);
}

std::optional<std::string> token_field(const OperationSpec& op) {
  for (const auto& field : list_io_fields(op).outputs) {
    if (field.schema.kind != SchemaKind::String) continue;
    if (mentions(tokenize_identifier(field.path), kCredentialWords)) return field.path;
  }
  return std::nullopt;
}

AgentSet init_agents(const ApiModel& model, const Spdg& graph, const AgentConfig& config) {
  AgentSet agents{
      .operation = QTable(config.learning_rate, config.discount),
      .parameter = QTable(config.learning_rate, config.discount),
      .value = QTable(config.learning_rate, config.discount),
      .dependency = QTable(config.learning_rate, config.discount),
      .header = QTable(config.learning_rate, config.discount),
      .info = {},
      .account_operations = {},
  };

  std::vector<std::string> op_ids;
  for (const auto& op : model.operations) {
    op_ids.push_back(op.id);
    if (is_account_operation(op)) agents.account_operations.push_back(op.id);
  }
  agents.operation.add_state(std::string(kGlobalState), op_ids);

  std::vector<std::string> header_actions{std::string(kNoAuth)};
  for (const auto& id : agents.account_operations) {
    header_actions.push_back(std::string(kTokenPrefix) + id);
  }

  for (const auto& op : model.operations) {
    OperationAgentInfo info = describe_operation(op);
    if (info.per_item) {
      for (const auto& item : info.items) {
        agents.parameter.add_state(item_state(op.id, item.label),
                                   {std::string(kInclude), std::string(kExclude)});
      }
    } else {
      std::vector<std::string> subsets;
      std::uint64_t count = std::uint64_t{1} << info.items.size();
      for (std::uint64_t mask = 0; mask < count; ++mask) {
        subsets.push_back(subset_key(info.items, mask));
      }
      agents.parameter.add_state(op.id, std::move(subsets));
    }

    for (const auto& field : info.value_fields) {
      std::string state = field_state(op.id, field.path);
      std::vector<std::string> sources;
      if (config.llm_enabled) sources.emplace_back(kSourceLlm);
      auto candidates = producers_for(graph, op.id, field.path);
      if (!candidates.empty()) {
        sources.emplace_back(kSourceDependency);
        std::vector<std::string> edge_ids;
        for (const auto& edge : candidates) edge_ids.push_back(edge.id);
        agents.dependency.add_state(state, std::move(edge_ids));
      }
      sources.emplace_back(kSourceDefault);
      agents.value.add_state(state, std::move(sources));
    }
    agents.header.add_state(op.id, header_actions);
    agents.info.emplace(op.id, std::move(info));
  }
  return agents;
}

std::vector<AppliedUpdate> delegate_rewards(AgentSet& agents,
                                            const std::vector<Decision>& provenance,
                                            int status, const RewardRule& rule) {
  std::vector<AppliedUpdate> applied;
  applied.reserve(provenance.size());
  for (const auto& d : provenance) {
    double reward = rule.reward(d.agent, status);
    double q = update_q(agents.table(d.agent), d.state, d.action, reward, d.state);
    applied.push_back(AppliedUpdate{d.agent, d.state, d.action, reward, q});
  }
  return applied;
}

}  // namespace resttest
