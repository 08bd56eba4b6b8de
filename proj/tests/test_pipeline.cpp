#include <gtest/gtest.h>

#include <sstream>

#include "resttest/pipeline.hpp"
#include "resttest/sandbox.hpp"
#include "resttest/stub_llm.hpp"
#include "test_helpers.hpp"

namespace resttest {
namespace {

RunConfig base_config(const std::filesystem::path& dir, const std::string& server_url,
                      const std::string& spec = "market") {
  RunConfig c;
  c.spec_path = testing::source_path("sandbox/specs/" + spec + ".yaml");
  c.embedding_path = testing::source_path("sandbox/embeddings/sandbox-50d.txt");
  c.server_url = server_url;
  c.output_dir = (dir / "data").string();
  c.cache_dir = (dir / "cache").string();
  c.duration_seconds = 30;
  c.max_requests = 300;
  c.seed = 7;
  c.llm_enabled = false;
  c.progress_interval_seconds = 0.5;
  return c;
}

TEST(Pipeline, BadSpecExitsWithoutReports) {
  auto dir = testing::temp_dir("pipeline-bad");
  RunConfig c = base_config(dir, "http://127.0.0.1:1");
  c.spec_path = (dir / "missing.yaml").string();
  std::ostringstream out, err;
  RunSummary s = run_pipeline(c, {out, err});
  EXPECT_EQ(s.exit_code, kExitSetupFailure);
  EXPECT_FALSE(std::filesystem::exists(dir / "data"));
  EXPECT_NE(err.str().find("error:"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, BadEmbeddingsExitWithoutReports) {
  auto dir = testing::temp_dir("pipeline-emb");
  RunConfig c = base_config(dir, "http://127.0.0.1:1");
  c.embedding_path = (dir / "none.txt").string();
  std::ostringstream out, err;
  EXPECT_EQ(run_pipeline(c, {out, err}).exit_code, kExitSetupFailure);
  EXPECT_FALSE(std::filesystem::exists(dir / "data"));
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, MilestonesInOrderAndReportsWritten) {
  auto dir = testing::temp_dir("pipeline-run");
  SandboxServer sandbox(market_service());
  StubLlmServer llm;
  RunConfig c = base_config(dir, sandbox.start());
  c.llm_enabled = true;
  c.llm.base_url = llm.start();
  c.llm.model_name = "stub";
  std::ostringstream out, err;
  RunSummary s = run_pipeline(c, {out, err});
  ASSERT_EQ(s.exit_code, kExitOk) << err.str();
  EXPECT_EQ(s.reports.size(), 7u);
  EXPECT_EQ(s.total_requests, 300u);

  std::string text = out.str();
  std::vector<std::string> milestones = {"Parsed specification", "Built semantic property",
                                         "Initialized Q-tables", "Starting request generation",
                                         "Finished:"};
  std::size_t pos = 0;
  for (const auto& m : milestones) {
    std::size_t at = text.find(m);
    ASSERT_NE(at, std::string::npos) << m;
    EXPECT_GE(at, pos) << m;
    EXPECT_EQ(text.find(m, at + 1), std::string::npos) << m << " printed twice";
    pos = at;
  }
  EXPECT_GT(llm.calls(), 0u);
  for (const char* name : kReportFiles) {
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.output_dir) / name)) << name;
  }
  Json report = Json::parse(testing::read_text(c.output_dir + "/report.json"));
  EXPECT_EQ(report["Number of Total Operations"], 13);
  EXPECT_EQ(report["Total Requests Sent"], 300);

  // Second run reuses the cached graph and LLM values.
  std::size_t llm_calls = llm.calls();
  std::ostringstream out2, err2;
  ASSERT_EQ(run_pipeline(c, {out2, err2}).exit_code, kExitOk);
  EXPECT_NE(out2.str().find("edges (from cache)"), std::string::npos);
  EXPECT_EQ(llm.calls(), llm_calls);
  sandbox.stop();
  llm.stop();
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, StopFlagStillWritesReports) {
  auto dir = testing::temp_dir("pipeline-stop");
  SandboxServer sandbox(chain3_service());
  RunConfig c = base_config(dir, sandbox.start(), "chain3");
  c.max_requests = 0;
  std::atomic<bool> stop{true};
  std::ostringstream out, err;
  RunSummary s = run_pipeline(c, {out, err, &stop});
  EXPECT_EQ(s.exit_code, kExitOk);
  EXPECT_EQ(s.reports.size(), 7u);
  sandbox.stop();
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, BaselineModeUsesNoTables) {
  auto dir = testing::temp_dir("pipeline-baseline");
  SandboxServer sandbox(chain3_service());
  RunConfig c = base_config(dir, sandbox.start(), "chain3");
  c.baseline_mode = true;
  std::ostringstream out, err;
  RunSummary s = run_pipeline(c, {out, err});
  EXPECT_EQ(s.exit_code, kExitOk);
  EXPECT_NE(out.str().find("baseline"), std::string::npos);
  EXPECT_EQ(testing::read_text(c.output_dir + "/q_tables.json"), "{}\n");
  sandbox.stop();
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, SameSeedSameReport) {
  auto dir = testing::temp_dir("pipeline-determinism");
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    SandboxServer sandbox(market_service());
    RunConfig c = base_config(dir / std::to_string(run), sandbox.start());
    c.mutation.mutation_rate = 0.2;
    std::ostringstream out, err;
    ASSERT_EQ(run_pipeline(c, {out, err}).exit_code, kExitOk);
    reports.push_back(testing::read_text(c.output_dir + "/report.json") +
                      testing::read_text(c.output_dir + "/q_tables.json"));
    sandbox.stop();
  }
  EXPECT_EQ(reports[0], reports[1]);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, DumpGraph) {
  auto dir = testing::temp_dir("pipeline-dump");
  SandboxServer sandbox(chain3_service());
  RunConfig c = base_config(dir, sandbox.start(), "chain3");
  c.dump_graph = true;
  c.max_requests = 10;
  std::ostringstream out, err;
  ASSERT_EQ(run_pipeline(c, {out, err}).exit_code, kExitOk);
  Json graph = Json::parse(testing::read_text(c.output_dir + "/spdg.json"));
  EXPECT_EQ(graph["nodes"].size(), 4u);
  sandbox.stop();
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace resttest
