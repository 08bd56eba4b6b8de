#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "resttest/json.hpp"

namespace resttest {

inline constexpr std::string_view kToolVersion = "0.3.0";

enum class CacheKind { Spdg, LlmValues, QTables };

std::string_view to_string(CacheKind kind);

struct CacheKey {
  std::string spec_digest;
  CacheKind kind = CacheKind::Spdg;
  std::string config_digest;

  // "<spec>:<kind>:<config>"
  std::string canonical() const;
  // Hex SHA-256 of the canonical form plus ".json".
  std::string file_name() const;
};

std::string sha256_hex(std::string_view data);

// Writes atomically (temporary file, then rename). Throws CacheWriteError.
void cache_put(const std::filesystem::path& dir, const CacheKey& key, const Json& payload);

// nullopt on a miss, a tool-version mismatch or a corrupt entry; corrupt
// entries are reported through `warn`.
std::optional<Json> cache_get(const std::filesystem::path& dir, const CacheKey& key,
                              const std::function<void(const std::string&)>& warn = {});

}  // namespace resttest
