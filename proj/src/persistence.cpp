#include "resttest/persistence.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "resttest/errors.hpp"

namespace resttest {

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(CacheKind kind) {
  switch (kind) {
    case CacheKind::Spdg: return "SPDG";
    case CacheKind::LlmValues: return "LLM_VALUES";
    case CacheKind::QTables: return "Q_TABLES";
  }
  return "SPDG";
}

std::string CacheKey::canonical() const {
  return spec_digest + ":" + std::string(to_string(kind)) + ":" + config_digest;
}

std::string CacheKey::file_name() const { return sha256_hex(canonical()) + ".json"; }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

void cache_put(const std::filesystem::path& dir, const CacheKey& key, const Json& payload) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CacheWriteError("cannot create cache directory " + dir.string() + ": " + ec.message());

  std::string body = payload.dump();
  Json envelope = {{"key", key.canonical()},
                   {"tool_version", kToolVersion},
                   {"created_at", utc_timestamp()},
                   {"payload_sha256", sha256_hex(body)},
                   {"payload", payload}};
  std::filesystem::path target = dir / key.file_name();
  std::filesystem::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (out) out << envelope.dump() << '\n';
    if (!out) throw CacheWriteError("cannot write cache file " + temp.string());
  }
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw CacheWriteError("cannot move cache file into place: " + target.string());
  }
}

std::optional<Json> cache_get(const std::filesystem::path& dir, const CacheKey& key,
                              const std::function<void(const std::string&)>& warn) {
  std::filesystem::path path = dir / key.file_name();
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();

  auto corrupt = [&](const std::string& why) -> std::optional<Json> {
    if (warn) warn("warning: ignoring corrupt cache entry " + path.string() + " (" + why + ")");
    return std::nullopt;
  };
  Json envelope = Json::parse(buffer.str(), nullptr, false);
  if (envelope.is_discarded() || !envelope.is_object()) return corrupt("not JSON");
  auto version = envelope.find("tool_version");
  if (version == envelope.end() || !version->is_string()) return corrupt("no version");
  if (version->get<std::string>() != kToolVersion) return std::nullopt;
  auto stored_key = envelope.find("key");
  auto payload = envelope.find("payload");
  auto digest = envelope.find("payload_sha256");
  if (stored_key == envelope.end() || payload == envelope.end() || digest == envelope.end()) {
    return corrupt("missing fields");
  }
  if (*stored_key != key.canonical()) return corrupt("key mismatch");
  if (*digest != sha256_hex(payload->dump())) return corrupt("checksum mismatch");
  return *payload;
}

}  // namespace resttest
