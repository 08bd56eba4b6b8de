#include <gtest/gtest.h>

#include <fstream>

#include "resttest/config.hpp"
#include "resttest/errors.hpp"
#include "test_helpers.hpp"

namespace resttest {
namespace {

TEST(LoadConfig, DefaultsWithSpecFlag) {
  RunConfig c = load_config_text("", {{"spec_path", "api.yaml"}});
  EXPECT_EQ(c.spec_path, "api.yaml");
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.1);
  EXPECT_DOUBLE_EQ(c.discount, 0.9);
  EXPECT_DOUBLE_EQ(c.similarity_threshold, 0.7);
  EXPECT_DOUBLE_EQ(c.llm.temperature, 0.7);
  EXPECT_DOUBLE_EQ(c.duration_seconds, 300);
  EXPECT_DOUBLE_EQ(c.epsilon.initial, 1.0);
  EXPECT_DOUBLE_EQ(c.epsilon.decay, 0.999);
  EXPECT_DOUBLE_EQ(c.epsilon.floor, 0.05);
  EXPECT_EQ(c.fallback_k, 3);
  EXPECT_FALSE(c.seed.has_value());
}

TEST(LoadConfig, FlagsOverrideFile) {
  auto dir = testing::temp_dir("config");
  auto path = dir / "run.yaml";
  { std::ofstream(path) << "spec_path: a.yaml\nduration_seconds: 600\nseed: 9\n"; }
  RunConfig c = load_config(path, {{"duration_seconds", "120"}});
  EXPECT_DOUBLE_EQ(c.duration_seconds, 120);
  EXPECT_EQ(c.seed, std::optional<std::uint64_t>(9));
  EXPECT_EQ(c.spec_path, "a.yaml");
  std::filesystem::remove_all(dir);
}

TEST(LoadConfig, ReportsEveryViolation) {
  try {
    load_config_text("mutation_rate: 1.5\nlearning_rate: 0\nbogus: 1\ndiscount: abc\n", {});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    std::string all;
    for (const auto& v : e.violations()) all += v + "\n";
    EXPECT_NE(all.find("mutation_rate: must be within [0, 1]"), std::string::npos) << all;
    EXPECT_NE(all.find("learning_rate"), std::string::npos);
    EXPECT_NE(all.find("bogus"), std::string::npos);
    EXPECT_NE(all.find("discount"), std::string::npos);
    EXPECT_NE(all.find("spec_path"), std::string::npos);
  }
}

TEST(LoadConfig, MissingFile) {
  EXPECT_THROW(load_config(std::filesystem::path("/nonexistent/run.yaml"), {}), ConfigError);
}

TEST(ConfigJson, DeclarationOrderAndNoSecrets) {
  RunConfig c = load_config_text("", {}, false);
  c.llm.api_key = "sk-secret";
  Json j = config_to_json(c);
  EXPECT_EQ(j.begin().key(), "spec_path");
  EXPECT_EQ(j["learning_rate"], 0.1);
  EXPECT_EQ(j["discount"], 0.9);
  EXPECT_EQ(j["similarity_threshold"], 0.7);
  EXPECT_EQ(j["llm_temperature"], 0.7);
  EXPECT_EQ(j["duration_seconds"], 300.0);
  EXPECT_TRUE(j["seed"].is_null());
  EXPECT_EQ(j.dump().find("sk-secret"), std::string::npos);
}

TEST(ConfigDigest, TracksRelevantSettings) {
  RunConfig a = load_config_text("", {}, false);
  RunConfig b = a;
  b.duration_seconds = 5;
  EXPECT_EQ(graph_config_digest(a), graph_config_digest(b));
  b.similarity_threshold = 0.8;
  EXPECT_NE(graph_config_digest(a), graph_config_digest(b));
  b = a;
  b.llm.model_name = "other";
  EXPECT_NE(llm_config_digest(a), llm_config_digest(b));
}

}  // namespace
}  // namespace resttest
