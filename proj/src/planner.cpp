#include "resttest/planner.hpp"

#include <algorithm>

#include "resttest/errors.hpp"

namespace resttest {

namespace {

// Epsilon-greedy over a subset of a state's actions (by index).
std::size_t select_among(const QTable& table, std::string_view state,
                         const std::vector<std::size_t>& allowed, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    return allowed[pick(rng)];
  }
  const auto& values = table.values(state);
  double best = values[allowed.front()];
  for (std::size_t i : allowed) best = std::max(best, values[i]);
  std::vector<std::size_t> ties;
  for (std::size_t i : allowed) {
    if (values[i] == best) ties.push_back(i);
  }
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

}  // namespace

// --- LlmValueCache -------------------------------------------------------------------

LlmValueCache::LlmValueCache(LlmGenerator generator, LlmConfig config, WarningSink warn)
    : generator_(std::move(generator)), config_(std::move(config)), warn_(std::move(warn)) {}

const std::map<std::string, Json>& LlmValueCache::values_for(const OperationSpec& op,
                                                             const OperationAgentInfo& info) {
  if (auto it = values_.find(op.id); it != values_.end()) return it->second;
  auto& slot = values_[op.id];
  if (info.value_fields.empty()) return slot;

  ValueRequest request;
  request.operation = &op;
  for (const auto& field : info.value_fields) {
    request.target_fields.push_back(TargetField{field.path, field.schema});
  }
  ++calls_;
  try {
    LlmResult result = generator_(request);
    cost_.track(result.usage, config_);
    slot = std::move(result.values);
  } catch (const Error& e) {
    if (warn_) warn_("warning: LLM values for " + op.id + " unavailable: " + e.what());
  }
  return slot;
}

bool LlmValueCache::contains(std::string_view operation_id) const {
  return values_.find(operation_id) != values_.end();
}

Json LlmValueCache::to_json() const {
  Json out = Json::object();
  for (const auto& [op, fields] : values_) {
    Json entry = Json::object();
    for (const auto& [path, value] : fields) entry[path] = value;
    out[op] = std::move(entry);
  }
  return out;
}

void LlmValueCache::load(const Json& doc) {
  if (!doc.is_object()) return;
  for (const auto& [op, fields] : doc.items()) {
    if (!fields.is_object()) continue;
    auto& slot = values_[op];
    for (const auto& [path, value] : fields.items()) slot[path] = value;
  }
}

// --- Planner ------------------------------------------------------------------------

Planner::Planner(const ApiModel& model, AgentSet* agents) : model_(model), agents_(agents) {
  for (const auto& op : model.operations) {
    operation_ids_.push_back(op.id);
    OperationPlanInfo entry;
    entry.op = &op;
    entry.info = describe_operation(op);
    for (std::size_t i = 0; i < entry.info.items.size(); ++i) {
      if (entry.info.items[i].required) entry.required_mask |= std::uint64_t{1} << i;
    }
    if (!entry.info.per_item) {
      std::uint64_t count = std::uint64_t{1} << entry.info.items.size();
      for (std::uint64_t mask = 0; mask < count; ++mask) {
        if ((mask & entry.required_mask) == entry.required_mask) {
          entry.allowed_subsets.push_back(static_cast<std::size_t>(mask));
        }
      }
    }
    ops_.emplace(op.id, std::move(entry));
  }
}

RequestPlan Planner::plan(PlannerContext& ctx, double epsilon, Rng& rng) {
  if (operation_ids_.empty()) throw NoActions("the API has no operations");
  return agents_ ? plan_learning(ctx, epsilon, rng) : plan_baseline(rng);
}

RequestPlan Planner::plan_learning(PlannerContext& ctx, double epsilon, Rng& rng) {
  AgentSet& agents = *agents_;
  RequestPlan plan;
  std::string state(kGlobalState);
  plan.operation_id = select_action(agents.operation, state, epsilon, rng);
  plan.provenance.push_back({AgentKind::Operation, state, plan.operation_id});
  const OperationPlanInfo& entry = ops_.find(plan.operation_id)->second;
  const OperationSpec& op = *entry.op;
  const OperationAgentInfo& info = entry.info;

  plan.header_choice = select_action(agents.header, op.id, epsilon, rng);
  plan.provenance.push_back({AgentKind::Header, op.id, plan.header_choice});
  if (plan.header_choice.rfind(kTokenPrefix, 0) == 0) {
    auto it = ctx.tokens.find(std::string_view(plan.header_choice).substr(kTokenPrefix.size()));
    if (it != ctx.tokens.end()) plan.bearer_token = it->second;
  }

  std::vector<bool> included(info.items.size(), false);
  if (info.per_item) {
    for (std::size_t i = 0; i < info.items.size(); ++i) {
      if (info.items[i].required) {
        included[i] = true;
        continue;
      }
      std::string s = item_state(op.id, info.items[i].label);
      const std::string& choice = select_action(agents.parameter, s, epsilon, rng);
      included[i] = choice == kInclude;
      plan.provenance.push_back({AgentKind::Parameter, s, choice});
    }
  } else {
    std::size_t mask = select_among(agents.parameter, op.id, entry.allowed_subsets, epsilon, rng);
    for (std::size_t i = 0; i < info.items.size(); ++i) included[i] = (mask >> i) & 1U;
    plan.provenance.push_back(
        {AgentKind::Parameter, op.id, agents.parameter.actions(op.id)[mask]});
  }
  for (std::size_t i = 0; i < info.items.size(); ++i) {
    if (included[i]) plan.included_items.push_back(info.items[i].label);
  }

  for (const auto& field : info.value_fields) {
    if (!included[field.item]) continue;
    std::string s = field_state(op.id, field.path);
    const std::string& source = select_action(agents.value, s, epsilon, rng);
    plan.provenance.push_back({AgentKind::Value, s, source});
    FieldAssignment assignment{field.path, ValueSource::Default, nullptr, std::nullopt};
    bool assigned = false;
    if (source == kSourceLlm && ctx.llm) {
      const auto& values = ctx.llm->values_for(op, info);
      if (auto it = values.find(field.path); it != values.end()) {
        assignment.source = ValueSource::Llm;
        assignment.value = it->second;
        assigned = true;
      }
    } else if (source == kSourceDependency) {
      const std::string& edge_id = select_action(agents.dependency, s, epsilon, rng);
      plan.provenance.push_back({AgentKind::Dependency, s, edge_id});
      const DependencyEdge* edge = ctx.graph.find_edge(edge_id);
      std::optional<Json> value = edge ? dependency_value(*edge, ctx.store, rng) : std::nullopt;
      if (value) {
        assignment.source = ValueSource::Dependency;
        assignment.value = std::move(*value);
        assignment.edge_id = edge_id;
        assigned = true;
      } else if (edge) {
        record_observation(ctx.graph, edge_id, false);
      }
    }
    if (!assigned) assignment.value = default_value(field.schema, rng);
    plan.fields.push_back(std::move(assignment));
  }

  if (op.request_body) plan.media_type = op.request_body->preferred().media_type;
  return plan;
}

RequestPlan Planner::plan_baseline(Rng& rng) {
  RequestPlan plan;
  std::uniform_int_distribution<std::size_t> pick_op(0, operation_ids_.size() - 1);
  plan.operation_id = operation_ids_[pick_op(rng)];
  const OperationPlanInfo& entry = ops_.find(plan.operation_id)->second;
  const OperationAgentInfo& info = entry.info;

  std::bernoulli_distribution coin(0.5);
  std::vector<bool> included(info.items.size(), false);
  for (std::size_t i = 0; i < info.items.size(); ++i) {
    included[i] = info.items[i].required || coin(rng);
    if (included[i]) plan.included_items.push_back(info.items[i].label);
  }
  for (const auto& field : info.value_fields) {
    if (!included[field.item]) continue;
    plan.fields.push_back(
        FieldAssignment{field.path, ValueSource::Default, default_value(field.schema, rng),
                        std::nullopt});
  }
  if (entry.op->request_body) plan.media_type = entry.op->request_body->preferred().media_type;
  return plan;
}

}  // namespace resttest
