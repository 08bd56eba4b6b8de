#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "resttest/json.hpp"

namespace resttest {

// Canned values for the field list of a value-generation prompt
// (`[{name, type, enum?, example?}]`), keyed by field name.
Json stub_values(const Json& fields);

// The reply content for a prompt: a JSON object, or "{}" when the prompt
// carries no field list.
std::string stub_reply(std::string_view prompt);

// OpenAI-compatible chat-completions endpoint answering with stub_reply().
class StubLlmServer {
 public:
  StubLlmServer();
  ~StubLlmServer();
  StubLlmServer(const StubLlmServer&) = delete;
  StubLlmServer& operator=(const StubLlmServer&) = delete;

  // Serves in a background thread; returns the base URL ending in "/v1".
  // Throws PortInUse.
  std::string start(int port = 0);
  void run(int port);
  void stop();
  std::string base_url() const;
  std::size_t calls() const { return calls_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace resttest
