#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "resttest/json.hpp"
#include "resttest/oasmodel.hpp"

namespace resttest {

struct SandboxRequest {
  HttpMethod method = HttpMethod::Get;
  std::string path;  // decoded, without query
  std::vector<std::pair<std::string, std::string>> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;

  std::string header(std::string_view lower_name) const;
};

struct SandboxResponse {
  int status = 200;
  Json body = Json::object();
};

struct SeededBug {
  std::string operation_id;
  std::string trigger;
  std::string message;  // the 500 body's "error" text (before variable parts)
};

// Parsed inputs of a request that passed routing, auth and validation.
struct ValidatedRequest {
  const OperationSpec* operation = nullptr;
  std::map<std::string, std::string> path;
  std::map<std::string, Json> query;
  Json body;  // null when the operation takes none
  std::string accept;
  std::string bearer_token;
};

// An in-memory mock REST service. Requests are routed through the
// service's own spec, then checked in order: authentication (401), media
// type (415), parameter and body validation (400), and finally the
// operation handler. Responses depend only on the request history.
class SandboxService {
 public:
  SandboxService(std::string name, std::string spec_text);
  virtual ~SandboxService() = default;

  const std::string& name() const { return name_; }
  const std::string& spec_text() const { return spec_text_; }
  const ApiModel& model() const { return model_; }
  virtual std::vector<SeededBug> bug_manifest() const { return {}; }

  SandboxResponse handle(const SandboxRequest& request);

 protected:
  virtual SandboxResponse on_operation(const ValidatedRequest& request) = 0;
  // True when the bearer token grants access to secured operations.
  virtual bool token_valid(const std::string& token) const;

  // Deterministic, unguessable identifier: prefix + 16 hex digits.
  std::string next_id(std::string_view prefix);

 private:
  std::string name_;
  std::string spec_text_;
  ApiModel model_;
  std::uint64_t id_counter_ = 0;
};

std::unique_ptr<SandboxService> market_service();
std::unique_ptr<SandboxService> chain3_service();
// "market" or "chain3"; nullptr otherwise.
std::unique_ptr<SandboxService> make_sandbox_service(std::string_view name);

// Serves a SandboxService over HTTP on 127.0.0.1, one request at a time.
class SandboxServer {
 public:
  explicit SandboxServer(std::unique_ptr<SandboxService> service);
  ~SandboxServer();
  SandboxServer(const SandboxServer&) = delete;
  SandboxServer& operator=(const SandboxServer&) = delete;

  // Binds and serves in a background thread; port 0 picks a free port.
  // Returns the base URL. Throws PortInUse.
  std::string start(int port = 0);
  // Binds and serves on the calling thread until stop().
  void run(int port);
  void stop();
  int port() const { return port_; }
  std::string base_url() const;
  SandboxService& service() { return *service_; }

 private:
  struct Impl;
  std::unique_ptr<SandboxService> service_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace resttest
