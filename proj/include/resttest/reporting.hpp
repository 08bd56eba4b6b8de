#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "resttest/json.hpp"

namespace resttest {

inline constexpr std::size_t kMaxResponseBody = 64 * 1024;

// One dispatched request and what came back.
struct HttpExchange {
  std::string operation_id;
  std::string method;
  std::string url;
  std::vector<std::pair<std::string, std::string>> request_headers;
  std::string request_body;
  int status = 0;  // 0 marks a transport error
  std::string transport_error;
  std::string response_body;  // truncated to kMaxResponseBody
  std::chrono::microseconds latency{0};
  std::vector<std::string> mutation_log;

  bool is_transport_error() const { return status == 0; }
};

struct ServerErrorRecord {
  std::string dedup_key;
  HttpExchange exchange;
};

// Deduplicated, insertion-ordered list of JSON samples per operation.
class SampleStore {
 public:
  explicit SampleStore(std::size_t per_operation_cap = 50) : cap_(per_operation_cap) {}
  void add(const std::string& operation_id, const Json& sample);
  const std::map<std::string, std::vector<Json>>& samples() const { return samples_; }

 private:
  std::size_t cap_;
  std::map<std::string, std::vector<Json>> samples_;
  std::map<std::string, std::set<std::string>> seen_;
};

// Counters and stores accumulated by the run loop.
struct RunState {
  std::string title;
  std::string spec_name;
  double duration_budget_seconds = 300.0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::string> operation_ids;

  std::uint64_t total_requests = 0;
  std::uint64_t transport_errors = 0;
  std::map<int, std::uint64_t> status_distribution;
  std::vector<int> status_order;  // first-seen order of status codes
  std::map<std::string, std::map<int, std::uint64_t>> operation_status;
  std::set<std::string> successful_operations;

  std::map<std::string, ServerErrorRecord> unique_server_errors;  // by dedup key
  std::vector<ServerErrorRecord> server_errors;                   // every 5xx
  std::map<std::string, std::uint64_t> unique_errors_per_operation;
  std::vector<std::string> error_operation_order;  // first-seen order
  std::map<std::string, std::uint64_t> server_error_requests_per_operation;

  SampleStore successful_parameters;
  SampleStore successful_bodies;
  SampleStore successful_primitives;

  double llm_cost = 0.0;
  Json q_tables = Json::object();

  // Counts a non-transport response. Returns true the first time an
  // operation succeeds.
  bool record_status(const std::string& operation_id, int status);
  // Records a 5xx. Returns true when the dedup key is new.
  bool record_server_error(const std::string& dedup_key, const HttpExchange& exchange);
};

// "23.08%" for 3 of 13; "0.00%" when there are no operations.
std::string format_percentage(std::size_t successes, std::size_t total);

Json build_report(const RunState& run);

inline constexpr const char* kReportFiles[] = {
    "report.json",
    "server_errors.json",
    "operation_status_codes.json",
    "successful_parameters.json",
    "successful_bodies.json",
    "successful_primitives.json",
    "q_tables.json",
};

// Writes the seven output files; returns their paths. Throws ReportWriteError.
std::vector<std::filesystem::path> write_reports(const RunState& run,
                                                 const std::filesystem::path& out_dir);

// Replaces credential-bearing header values with "***".
std::vector<std::pair<std::string, std::string>> redact_headers(
    const std::vector<std::pair<std::string, std::string>>& headers);

std::string progress_line(const RunState& run, std::chrono::steady_clock::time_point now);

}  // namespace resttest
