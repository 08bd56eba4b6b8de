#include "resttest/reporting.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "resttest/errors.hpp"

namespace resttest {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string format_seconds(double seconds) {
  if (seconds == std::floor(seconds)) return fmt::format("{}", static_cast<long long>(seconds));
  return fmt::format("{}", seconds);
}

Json samples_json(const SampleStore& store) {
  Json out = Json::object();
  for (const auto& [op, samples] : store.samples()) out[op] = Json(samples);
  return out;
}

Json error_entry(const ServerErrorRecord& record) {
  const HttpExchange& e = record.exchange;
  Json headers = Json::object();
  for (const auto& [name, value] : redact_headers(e.request_headers)) headers[name] = value;
  Json request_body = e.request_body.empty()
                          ? Json(nullptr)
                          : Json::parse(e.request_body, nullptr, false);
  if (request_body.is_discarded()) request_body = e.request_body;
  Json response_body = Json::parse(e.response_body, nullptr, false);
  if (response_body.is_discarded()) response_body = e.response_body;
  return {{"operation_id", e.operation_id},
          {"dedup_key", record.dedup_key},
          {"request",
           {{"method", e.method}, {"url", e.url}, {"headers", headers}, {"body", request_body}}},
          {"response", {{"status", e.status}, {"body", response_body}}},
          {"mutations", Json(e.mutation_log)}};
}

std::vector<std::string> as_strings(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

void write_file(const std::filesystem::path& path, const Json& doc,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out << doc.dump(2) << '\n';
  if (!out) {
    throw ReportWriteError("cannot write " + path.string(), as_strings(written));
  }
  written.push_back(path);
}

}  // namespace

void SampleStore::add(const std::string& operation_id, const Json& sample) {
  auto& seen = seen_[operation_id];
  auto& list = samples_[operation_id];
  if (list.size() >= cap_) return;
  if (!seen.insert(sample.dump()).second) return;
  list.push_back(sample);
}

bool RunState::record_status(const std::string& operation_id, int status) {
  auto [it, inserted] = status_distribution.try_emplace(status, 0);
  if (inserted) status_order.push_back(status);
  ++it->second;
  ++operation_status[operation_id][status];
  if (status >= 200 && status < 300) return successful_operations.insert(operation_id).second;
  return false;
}

bool RunState::record_server_error(const std::string& dedup_key, const HttpExchange& exchange) {
  const std::string& op = exchange.operation_id;
  ++server_error_requests_per_operation[op];
  server_errors.push_back({dedup_key, exchange});
  if (unique_server_errors.count(dedup_key)) return false;
  unique_server_errors.emplace(dedup_key, ServerErrorRecord{dedup_key, exchange});
  if (unique_errors_per_operation[op]++ == 0) error_operation_order.push_back(op);
  return true;
}

std::string format_percentage(std::size_t successes, std::size_t total) {
  double pct = total == 0 ? 0.0 : 100.0 * static_cast<double>(successes) / static_cast<double>(total);
  return fmt::format("{:.2f}%", std::round(pct * 100.0) / 100.0);
}

Json build_report(const RunState& run) {
  Json distribution = Json::object();
  for (int status : run.status_order) {
    distribution[std::to_string(status)] = run.status_distribution.at(status);
  }
  Json per_operation = Json::object();
  for (const auto& op : run.error_operation_order) {
    auto count = run.unique_errors_per_operation.at(op);
    if (count > 0) per_operation[op] = count;
  }
  Json report = Json::object();
  report["Title"] = "Report for '" + run.title + "' (" + run.spec_name + ")";
  report["Duration"] = format_seconds(run.duration_budget_seconds) + " seconds";
  report["Total Requests Sent"] = run.total_requests;
  report["Status Code Distribution"] = distribution;
  report["Number of Total Operations"] = run.operation_ids.size();
  report["Number of Successfully Processed Operations"] = run.successful_operations.size();
  report["Percentage of Successfully Processed Operations"] =
      format_percentage(run.successful_operations.size(), run.operation_ids.size());
  report["Number of Unique Server Errors"] = run.unique_server_errors.size();
  report["Operations with Server Errors"] = per_operation;
  return report;
}

std::vector<std::pair<std::string, std::string>> redact_headers(
    const std::vector<std::pair<std::string, std::string>>& headers) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(headers.size());
  for (const auto& [name, value] : headers) {
    std::string n = lower(name);
    bool secret = n == "authorization" || n == "cookie" || n.find("key") != std::string::npos ||
                  n.find("token") != std::string::npos || n.find("secret") != std::string::npos;
    out.emplace_back(name, secret ? "***" : value);
  }
  return out;
}

std::vector<std::filesystem::path> write_reports(const RunState& run,
                                                 const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ReportWriteError("cannot create " + out_dir.string() + ": " + ec.message(), {});

  Json errors = Json::array();
  for (const auto& record : run.server_errors) errors.push_back(error_entry(record));
  Json raw_counts = Json::object();
  for (const auto& [op, n] : run.server_error_requests_per_operation) raw_counts[op] = n;
  Json server_errors = {{"server_error_requests_per_operation", raw_counts},
                        {"errors", errors}};

  Json status_codes = Json::object();
  for (const auto& [op, codes] : run.operation_status) {
    Json entry = Json::object();
    for (const auto& [status, n] : codes) entry[std::to_string(status)] = n;
    status_codes[op] = entry;
  }

  write_file(out_dir / kReportFiles[0], build_report(run), written);
  write_file(out_dir / kReportFiles[1], server_errors, written);
  write_file(out_dir / kReportFiles[2], status_codes, written);
  write_file(out_dir / kReportFiles[3], samples_json(run.successful_parameters), written);
  write_file(out_dir / kReportFiles[4], samples_json(run.successful_bodies), written);
  write_file(out_dir / kReportFiles[5], samples_json(run.successful_primitives), written);
  write_file(out_dir / kReportFiles[6], run.q_tables, written);
  return written;
}

std::string progress_line(const RunState& run, std::chrono::steady_clock::time_point now) {
  double elapsed = std::chrono::duration<double>(now - run.start).count();
  double pct = run.duration_budget_seconds > 0
                   ? std::min(100.0, 100.0 * elapsed / run.duration_budget_seconds)
                   : 100.0;
  std::uint64_t by_class[6] = {};
  for (const auto& [status, n] : run.status_distribution) {
    int c = status / 100;
    if (c >= 1 && c <= 5) by_class[c] += n;
  }
  return fmt::format(
      "[{:5.1f}%] requests {} | 2xx {} 4xx {} 5xx {} | ok ops {}/{} | unique 5xx {} | llm ${:.4f}",
      pct, run.total_requests, by_class[2], by_class[4], by_class[5],
      run.successful_operations.size(), run.operation_ids.size(), run.unique_server_errors.size(),
      run.llm_cost);
}

}  // namespace resttest
