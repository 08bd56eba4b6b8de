#include <gtest/gtest.h>

#include "resttest/errors.hpp"
#include "resttest/reporting.hpp"
#include "test_helpers.hpp"

namespace resttest {
namespace {

const std::vector<std::string> kReportKeys = {
    "Title",
    "Duration",
    "Total Requests Sent",
    "Status Code Distribution",
    "Number of Total Operations",
    "Number of Successfully Processed Operations",
    "Percentage of Successfully Processed Operations",
    "Number of Unique Server Errors",
    "Operations with Server Errors",
};

std::vector<std::string> keys_of(const Json& doc) {
  std::vector<std::string> out;
  for (const auto& [k, v] : doc.items()) out.push_back(k);
  return out;
}

HttpExchange exchange(const std::string& op, int status, const std::string& body = "{}") {
  HttpExchange ex;
  ex.operation_id = op;
  ex.method = "GET";
  ex.url = "http://h/x";
  ex.status = status;
  ex.response_body = body;
  ex.request_headers = {{"Authorization", "Bearer abc"}, {"Accept", "application/json"}};
  return ex;
}

TEST(FormatPercentage, Examples) {
  EXPECT_EQ(format_percentage(3, 13), "23.08%");
  EXPECT_EQ(format_percentage(0, 0), "0.00%");
  EXPECT_EQ(format_percentage(13, 13), "100.00%");
  EXPECT_EQ(format_percentage(1, 3), "33.33%");
}

TEST(BuildReport, ListingShape) {
  RunState run;
  run.title = "Api Documentation";
  run.spec_name = "market";
  for (int i = 0; i < 13; ++i) run.operation_ids.push_back("op" + std::to_string(i));
  const std::pair<int, int> dist[] = {{500, 149}, {401, 3509}, {200, 99}, {406, 215}, {404, 19}};
  for (auto [status, n] : dist) {
    for (int i = 0; i < n; ++i) {
      ++run.total_requests;
      run.record_status("op" + std::to_string(i % 3), status);
    }
  }
  Json report = build_report(run);
  EXPECT_EQ(keys_of(report), kReportKeys);
  EXPECT_EQ(report["Total Requests Sent"], 3991);
  std::uint64_t sum = 0;
  for (const auto& [k, v] : report["Status Code Distribution"].items()) sum += v.get<std::uint64_t>();
  EXPECT_EQ(sum, 3991u);
  EXPECT_EQ(keys_of(report["Status Code Distribution"]),
            (std::vector<std::string>{"500", "401", "200", "406", "404"}));
  EXPECT_EQ(report["Percentage of Successfully Processed Operations"], "23.08%");
  EXPECT_EQ(report["Title"], "Report for 'Api Documentation' (market)");
  EXPECT_EQ(report["Duration"], "300 seconds");
}

TEST(ServerErrors, UniqueAndRawCounts) {
  RunState run;
  auto add = [&](const std::string& op, const std::string& key) {
    HttpExchange ex = exchange(op, 500);
    ++run.total_requests;
    run.record_status(op, 500);
    return run.record_server_error(key, ex);
  };
  EXPECT_TRUE(add("a", "a|500|x"));
  EXPECT_FALSE(add("a", "a|500|x"));
  EXPECT_TRUE(add("a", "a|500|y"));
  EXPECT_TRUE(add("b", "b|500|x"));
  Json report = build_report(run);
  EXPECT_EQ(report["Number of Unique Server Errors"], 3);
  EXPECT_EQ(report["Operations with Server Errors"], (Json{{"a", 2}, {"b", 1}}));
  EXPECT_EQ(run.server_error_requests_per_operation.at("a"), 3u);
  EXPECT_EQ(run.server_errors.size(), 4u);
}

TEST(WriteReports, SevenFilesForEmptyRun) {
  auto dir = testing::temp_dir("reports-empty");
  RunState run;
  auto paths = write_reports(run, dir / "out");
  ASSERT_EQ(paths.size(), 7u);
  for (const char* name : kReportFiles) {
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / name)) << name;
  }
  Json report = Json::parse(testing::read_text((dir / "out" / "report.json").string()));
  EXPECT_EQ(keys_of(report), kReportKeys);
  EXPECT_EQ(report["Total Requests Sent"], 0);
  EXPECT_EQ(report["Percentage of Successfully Processed Operations"], "0.00%");
  EXPECT_TRUE(report["Status Code Distribution"].empty());
  std::filesystem::remove_all(dir);
}

TEST(WriteReports, ContentsAndIdempotence) {
  auto dir = testing::temp_dir("reports");
  RunState run;
  run.operation_ids = {"a", "b"};
  ++run.total_requests;
  run.record_status("a", 200);
  run.successful_bodies.add("a", Json{{"name", "x"}});
  run.successful_primitives.add("a", Json(5));
  run.successful_parameters.add("a", Json{{"id", 1}});
  ++run.total_requests;
  run.record_status("b", 500);
  run.record_server_error("b|500|boom", exchange("b", 500, R"({"message":"boom"})"));
  run.q_tables = Json{{"operation", {{"global", {{"a", 0.1}}}}}};

  write_reports(run, dir);
  std::vector<std::string> first;
  for (const char* name : kReportFiles) first.push_back(testing::read_text((dir / name).string()));
  write_reports(run, dir);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(testing::read_text((dir / kReportFiles[i]).string()), first[i]) << kReportFiles[i];
  }

  Json errors = Json::parse(first[1]);
  ASSERT_EQ(errors["errors"].size(), 1u);
  const Json& entry = errors["errors"][0];
  EXPECT_EQ(entry["response"]["status"], 500);
  EXPECT_EQ(entry["request"]["headers"]["Authorization"], "***");
  EXPECT_EQ(entry["request"]["headers"]["Accept"], "application/json");
  EXPECT_EQ(entry["dedup_key"], "b|500|boom");

  Json codes = Json::parse(first[2]);
  EXPECT_EQ(codes, (Json{{"a", {{"200", 1}}}, {"b", {{"500", 1}}}}));
  EXPECT_EQ(Json::parse(first[4])["a"][0]["name"], "x");
  EXPECT_EQ(Json::parse(first[5])["a"][0], 5);
  EXPECT_EQ(Json::parse(first[6])["operation"]["global"]["a"], 0.1);
  EXPECT_EQ(first[0].substr(0, 4), "{\n  ");
  std::filesystem::remove_all(dir);
}

TEST(WriteReports, FailureListsWrittenFiles) {
  auto dir = testing::temp_dir("reports-fail");
  std::filesystem::create_directories(dir / "server_errors.json");  // blocks that file
  RunState run;
  try {
    write_reports(run, dir);
    FAIL() << "expected ReportWriteError";
  } catch (const ReportWriteError& e) {
    ASSERT_EQ(e.written().size(), 1u);
    EXPECT_NE(e.written()[0].find("report.json"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST(SampleStoreTest, DedupAndCap) {
  SampleStore store(3);
  for (int i = 0; i < 10; ++i) store.add("op", Json(i % 5));
  EXPECT_EQ(store.samples().at("op"), (std::vector<Json>{0, 1, 2}));
}

TEST(RedactHeaders, MasksCredentials) {
  auto out = redact_headers({{"Authorization", "Bearer x"},
                             {"X-Api-Key", "k"},
                             {"Cookie", "s=1"},
                             {"X-Session-Token", "t"},
                             {"Accept", "*/*"}});
  EXPECT_EQ(out[0].second, "***");
  EXPECT_EQ(out[1].second, "***");
  EXPECT_EQ(out[2].second, "***");
  EXPECT_EQ(out[3].second, "***");
  EXPECT_EQ(out[4].second, "*/*");
}

TEST(ProgressLine, Fields) {
  RunState run;
  run.duration_budget_seconds = 10;
  run.operation_ids = {"a", "b"};
  EXPECT_EQ(progress_line(run, run.start),
            "[  0.0%] requests 0 | 2xx 0 4xx 0 5xx 0 | ok ops 0/2 | unique 5xx 0 | llm $0.0000");
  run.total_requests = 2;
  run.record_status("a", 200);
  run.record_status("b", 500);
  run.record_server_error("b|500|x", exchange("b", 500));
  std::string line = progress_line(run, run.start + std::chrono::seconds(5));
  EXPECT_EQ(line.substr(0, 8), "[ 50.0%]");
  EXPECT_NE(line.find("unique 5xx 1"), std::string::npos);
  EXPECT_NE(line.find("2xx 1 4xx 0 5xx 1"), std::string::npos);
}

}  // namespace
}  // namespace resttest
