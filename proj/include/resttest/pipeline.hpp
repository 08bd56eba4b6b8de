#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "resttest/config.hpp"
#include "resttest/executor.hpp"
#include "resttest/planner.hpp"

namespace resttest {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSetupFailure = 2;

struct RunIo {
  std::ostream& out;
  std::ostream& err;
  // Checked between episodes; set from a signal handler to stop early.
  const std::atomic<bool>* stop = nullptr;
};

struct RunSummary {
  int exit_code = kExitOk;
  std::uint64_t total_requests = 0;
  std::uint64_t transport_errors = 0;
  std::size_t unique_server_errors = 0;
  std::size_t successful_operations = 0;
  std::vector<std::filesystem::path> reports;
};

// Sends every account operation once (registrations first) with values
// shared by field name, so later requests can carry a bearer token.
void acquire_tokens(const ApiModel& model, HttpDispatcher& dispatcher, HandleContext& ctx,
                    Rng& rng);

// Parse, build the graph, initialise agents, run episodes until the budget
// is spent, then write the reports.
RunSummary run_pipeline(const RunConfig& config, RunIo io);

}  // namespace resttest
