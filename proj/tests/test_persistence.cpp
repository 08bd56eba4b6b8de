#include <gtest/gtest.h>

#include <fstream>

#include "resttest/errors.hpp"
#include "resttest/persistence.hpp"
#include "test_helpers.hpp"

namespace resttest {
namespace {

CacheKey key(const std::string& spec = "spec", CacheKind kind = CacheKind::Spdg) {
  return {sha256_hex(spec), kind, sha256_hex("config")};
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CacheKeyTest, CanonicalForm) {
  CacheKey k{"s", CacheKind::LlmValues, "c"};
  EXPECT_EQ(k.canonical(), "s:LLM_VALUES:c");
  EXPECT_EQ(k.file_name(), sha256_hex("s:LLM_VALUES:c") + ".json");
  EXPECT_EQ(to_string(CacheKind::QTables), "Q_TABLES");
}

TEST(Cache, RoundTripAndOverwrite) {
  auto dir = testing::temp_dir("cache");
  Json payload = Json::parse(R"({"b":[1,2.5,"x"],"a":{"z":null}})");
  cache_put(dir, key(), payload);
  auto got = cache_get(dir, key());
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->dump(), payload.dump());

  cache_put(dir, key(), Json{{"second", true}});
  EXPECT_EQ(*cache_get(dir, key()), (Json{{"second", true}}));
  std::filesystem::remove_all(dir);
}

TEST(Cache, MissesAreSilent) {
  auto dir = testing::temp_dir("cache-miss");
  int warnings = 0;
  auto warn = [&](const std::string&) { ++warnings; };
  EXPECT_FALSE(cache_get(dir, key(), warn).has_value());
  cache_put(dir, key("v1"), Json{{"x", 1}});
  EXPECT_FALSE(cache_get(dir, key("v2"), warn).has_value());
  EXPECT_FALSE(cache_get(dir, key("v1", CacheKind::LlmValues), warn).has_value());
  EXPECT_EQ(warnings, 0);
  std::filesystem::remove_all(dir);
}

TEST(Cache, CorruptEntriesWarn) {
  auto dir = testing::temp_dir("cache-corrupt");
  cache_put(dir, key(), Json{{"x", std::string(200, 'y')}});
  auto path = dir / key().file_name();
  std::string text = testing::read_text(path.string());

  std::vector<std::string> warnings;
  auto warn = [&](const std::string& w) { warnings.push_back(w); };

  { std::ofstream(path, std::ios::trunc) << text.substr(0, text.size() / 2); }
  EXPECT_FALSE(cache_get(dir, key(), warn).has_value());
  EXPECT_EQ(warnings.size(), 1u);

  Json envelope = Json::parse(text);
  envelope["payload"]["x"] = "tampered";
  { std::ofstream(path, std::ios::trunc) << envelope.dump(); }
  EXPECT_FALSE(cache_get(dir, key(), warn).has_value());
  EXPECT_EQ(warnings.size(), 2u);

  envelope = Json::parse(text);
  envelope["tool_version"] = "0.0.1";
  { std::ofstream(path, std::ios::trunc) << envelope.dump(); }
  EXPECT_FALSE(cache_get(dir, key(), warn).has_value());
  EXPECT_EQ(warnings.size(), 2u);  // version mismatch is an ordinary miss
  std::filesystem::remove_all(dir);
}

TEST(Cache, UnwritableDirectory) {
  auto dir = testing::temp_dir("cache-ro");
  auto blocker = dir / "file";
  { std::ofstream(blocker) << "x"; }
  EXPECT_THROW(cache_put(blocker / "sub", key(), Json{{"x", 1}}), CacheWriteError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace resttest
