#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "resttest/agents.hpp"
#include "resttest/executor.hpp"
#include "resttest/json.hpp"
#include "resttest/oasmodel.hpp"
#include "resttest/spdg.hpp"
#include "resttest/valuesources.hpp"

namespace resttest {

using LlmGenerator = std::function<LlmResult(const ValueRequest&)>;
using WarningSink = std::function<void(const std::string&)>;

// LLM-suggested values, fetched once per operation (all of its value fields
// in one call) and reused afterwards. Failed calls are remembered as empty.
class LlmValueCache {
 public:
  LlmValueCache(LlmGenerator generator, LlmConfig config, WarningSink warn = {});

  const std::map<std::string, Json>& values_for(const OperationSpec& op,
                                                const OperationAgentInfo& info);
  bool contains(std::string_view operation_id) const;
  std::size_t calls() const { return calls_; }
  const CostTracker& cost() const { return cost_; }

  // {operation id: {field path: value}}
  Json to_json() const;
  void load(const Json& doc);

 private:
  LlmGenerator generator_;
  LlmConfig config_;
  WarningSink warn_;
  CostTracker cost_;
  std::size_t calls_ = 0;
  std::map<std::string, std::map<std::string, Json>, std::less<>> values_;
};

struct PlannerContext {
  Spdg& graph;
  const ResponseStore& store;
  const TokenStore& tokens;
  LlmValueCache* llm = nullptr;  // null when the LLM source is disabled
};

// Turns agent choices into a RequestPlan. Without an AgentSet every choice
// is uniform random, values come from the schema only and no credentials
// are sent (the baseline).
class Planner {
 public:
  Planner(const ApiModel& model, AgentSet* agents);

  RequestPlan plan(PlannerContext& ctx, double epsilon, Rng& rng);

  bool learning() const { return agents_ != nullptr; }

 private:
  struct OperationPlanInfo {
    const OperationSpec* op = nullptr;
    OperationAgentInfo info;
    std::uint64_t required_mask = 0;
    std::vector<std::size_t> allowed_subsets;  // indexes into the parameter-table actions
  };

  RequestPlan plan_learning(PlannerContext& ctx, double epsilon, Rng& rng);
  RequestPlan plan_baseline(Rng& rng);

  const ApiModel& model_;
  AgentSet* agents_;
  std::vector<std::string> operation_ids_;
  std::map<std::string, OperationPlanInfo, std::less<>> ops_;
};

}  // namespace resttest
