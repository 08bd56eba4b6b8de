#include "resttest/stub_llm.hpp"

#include <httplib.h>

#include "resttest/embedding.hpp"
#include "resttest/errors.hpp"
#include "resttest/http_util.hpp"

namespace resttest {

namespace {

struct Canned {
  std::string_view token;
  Json value;
};

const std::vector<Canned>& canned_values() {
  static const std::vector<Canned> kValues = {
      {"email", "alice@example.com"},
      {"username", "alice"},
      {"password", "s3cret-pass"},
      {"card", "4111111111111111"},
      {"phone", "+1-404-555-0100"},
      {"street", "12 Peachtree St"},
      {"city", "Atlanta"},
      {"amount", 25.0},
      {"price", 25.0},
      {"total", 25.0},
      {"quantity", 2},
      {"limit", 2},
      {"count", 2},
      {"age", 34},
      {"sku", "SKU-1001"},
      {"label", "A1"},
      {"name", "Alice Smith"},
  };
  return kValues;
}

bool kind_matches(const Json& value, std::string_view type) {
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  return false;
}

Json fallback_for(std::string_view type) {
  if (type == "integer") return 1;
  if (type == "number") return 1.5;
  if (type == "boolean") return true;
  if (type == "array") return Json::array();
  if (type == "object") return Json::object();
  if (type == "null") return nullptr;
  return "sample";
}

}  // namespace

Json stub_values(const Json& fields) {
  Json out = Json::object();
  if (!fields.is_array()) return out;
  for (const auto& field : fields) {
    if (!field.is_object() || !field.contains("name")) continue;
    std::string name = field["name"].get<std::string>();
    std::string type = field.value("type", "string");
    if (auto e = field.find("enum"); e != field.end() && e->is_array() && !e->empty()) {
      out[name] = e->front();
      continue;
    }
    if (auto ex = field.find("example"); ex != field.end()) {
      out[name] = *ex;
      continue;
    }
    std::string leaf = name.substr(name.rfind('.') == std::string::npos ? 0 : name.rfind('.') + 1);
    auto tokens = tokenize_identifier(leaf);
    Json value = fallback_for(type);
    bool found = false;
    for (const auto& canned : canned_values()) {
      for (const auto& t : tokens) {
        if (t == canned.token && kind_matches(canned.value, type)) {
          value = canned.value;
          found = true;
          break;
        }
      }
      if (found) break;
    }
    out[name] = value;
  }
  return out;
}

std::string stub_reply(std::string_view prompt) {
  constexpr std::string_view kMarker = "Fields (JSON): ";
  std::size_t pos = prompt.find(kMarker);
  if (pos == std::string_view::npos) return "{}";
  std::size_t start = pos + kMarker.size();
  std::size_t end = prompt.find('\n', start);
  Json fields = Json::parse(prompt.substr(start, end == std::string_view::npos ? end : end - start),
                            nullptr, false);
  if (fields.is_discarded()) return "{}";
  return stub_values(fields).dump();
}

struct StubLlmServer::Impl {
  httplib::Server server;
};

StubLlmServer::StubLlmServer() : impl_(std::make_unique<Impl>()) {
  impl_->server.set_socket_options(exclusive_listen_options);
  impl_->server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                     httplib::Response& res) {
    Json request = Json::parse(req.body, nullptr, false);
    std::string prompt;
    if (!request.is_discarded() && request.contains("messages") &&
        request["messages"].is_array()) {
      for (const auto& m : request["messages"]) {
        if (m.contains("content") && m["content"].is_string()) {
          prompt += m["content"].get<std::string>();
          prompt += '\n';
        }
      }
    }
    std::size_t n = ++calls_;
    std::string content = stub_reply(prompt);
    std::uint64_t prompt_tokens = prompt.size() / 4 + 1;
    std::uint64_t completion_tokens = content.size() / 4 + 1;
    Json reply = {
        {"id", "stub-" + std::to_string(n)},
        {"object", "chat.completion"},
        {"model", request.is_discarded() ? Json("stub") : request.value("model", Json("stub"))},
        {"choices", Json::array({Json{{"index", 0},
                                      {"message", {{"role", "assistant"}, {"content", content}}},
                                      {"finish_reason", "stop"}}})},
        {"usage",
         {{"prompt_tokens", prompt_tokens},
          {"completion_tokens", completion_tokens},
          {"total_tokens", prompt_tokens + completion_tokens}}}};
    res.set_content(reply.dump(), "application/json");
  });
}

StubLlmServer::~StubLlmServer() { stop(); }

std::string StubLlmServer::start(int port) {
  auto& s = impl_->server;
  if (port == 0) {
    port_ = s.bind_to_any_port("127.0.0.1");
    if (port_ < 0) throw PortInUse("cannot bind an ephemeral port");
  } else {
    if (!s.bind_to_port("127.0.0.1", port)) {
      throw PortInUse("port " + std::to_string(port) + " is already in use");
    }
    port_ = port;
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return base_url();
}

void StubLlmServer::run(int port) {
  if (!impl_->server.bind_to_port("127.0.0.1", port)) {
    throw PortInUse("port " + std::to_string(port) + " is already in use");
  }
  port_ = port;
  impl_->server.listen_after_bind();
}

void StubLlmServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubLlmServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
}

}  // namespace resttest
