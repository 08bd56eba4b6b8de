#pragma once

#include <string>
#include <vector>

#include "resttest/agents.hpp"

namespace resttest::testing {

// Runs an epsilon-greedy Q-learner on a single-state bandit whose arms pay
// `rewards`, updating with the state as its own successor like the agents
// do. Returns the greedy arm index after `episodes` steps.
inline std::size_t run_bandit(const std::vector<double>& rewards, int episodes,
                              std::uint64_t seed, const EpsilonSchedule& schedule = {}) {
  QTable table;
  std::vector<std::string> arms;
  for (std::size_t i = 0; i < rewards.size(); ++i) arms.push_back("arm" + std::to_string(i));
  table.add_state("s", arms);
  Rng rng(seed);
  for (int episode = 0; episode < episodes; ++episode) {
    double eps = decay_epsilon(schedule, static_cast<std::uint64_t>(episode));
    const std::string& arm = select_action(table, "s", eps, rng);
    std::size_t index = std::stoul(arm.substr(3));
    update_q(table, "s", arm, rewards[index], "s");
  }
  const std::string& greedy = select_action(table, "s", 0.0, rng);
  return std::stoul(greedy.substr(3));
}

}  // namespace resttest::testing
