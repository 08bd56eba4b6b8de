#include "resttest/sandbox.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "resttest/errors.hpp"
#include "resttest/http_util.hpp"
#include "resttest/sandbox_specs.hpp"
#include "resttest/valuesources.hpp"

namespace resttest {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    std::size_t end = path.find('/', i);
    if (end == std::string_view::npos) end = path.size();
    out.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return out;
}

bool is_placeholder(const std::string& segment) {
  return segment.size() > 2 && segment.front() == '{' && segment.back() == '}';
}

std::optional<std::map<std::string, std::string>> match_template(
    const std::string& path_template, const std::vector<std::string>& segments) {
  auto parts = split_path(path_template);
  if (parts.size() != segments.size()) return std::nullopt;
  std::map<std::string, std::string> params;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (is_placeholder(parts[i])) {
      params[parts[i].substr(1, parts[i].size() - 2)] = segments[i];
    } else if (parts[i] != segments[i]) {
      return std::nullopt;
    }
  }
  return params;
}

SandboxResponse error(int status, std::string message) {
  return {status, Json{{"status", status}, {"error", std::move(message)}}};
}

SandboxResponse server_error(std::string message) {
  return {500, Json{{"status", 500}, {"error", "Internal Server Error"}, {"message", std::move(message)}}};
}

// Converts a textual parameter to the schema kind; nullopt when it cannot be.
std::optional<Json> convert_text(const std::string& text, const SchemaNode& schema) {
  switch (schema.kind) {
    case SchemaKind::String:
      return Json(text);
    case SchemaKind::Integer: {
      if (text.empty()) return std::nullopt;
      std::size_t used = 0;
      try {
        long long v = std::stoll(text, &used);
        if (used == text.size()) return Json(v);
      } catch (const std::exception&) {
      }
      return std::nullopt;
    }
    case SchemaKind::Number: {
      if (text.empty()) return std::nullopt;
      std::size_t used = 0;
      try {
        double v = std::stod(text, &used);
        if (used == text.size()) return Json(v);
      } catch (const std::exception&) {
      }
      return std::nullopt;
    }
    case SchemaKind::Boolean:
      if (text == "true") return Json(true);
      if (text == "false") return Json(false);
      return std::nullopt;
    default: {
      Json parsed = Json::parse(text, nullptr, false);
      if (parsed.is_discarded()) return std::nullopt;
      return parsed;
    }
  }
}

std::optional<Json> convert_param(const std::vector<std::string>& values,
                                  const SchemaNode& schema) {
  if (schema.kind == SchemaKind::Array) {
    Json out = Json::array();
    for (const auto& v : values) {
      auto item = schema.items ? convert_text(v, *schema.items) : std::optional<Json>(v);
      if (!item) return std::nullopt;
      out.push_back(std::move(*item));
    }
    return out;
  }
  if (values.size() != 1) return std::nullopt;
  return convert_text(values.front(), schema);
}

}  // namespace

std::string SandboxRequest::header(std::string_view lower_name) const {
  auto it = headers.find(std::string(lower_name));
  return it == headers.end() ? std::string() : it->second;
}

SandboxService::SandboxService(std::string name, std::string spec_text)
    : name_(std::move(name)), spec_text_(std::move(spec_text)), model_(parse_spec(spec_text_)) {}

bool SandboxService::token_valid(const std::string&) const { return false; }

std::string SandboxService::next_id(std::string_view prefix) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t v = splitmix64(fnv1a(name_) ^ ++id_counter_);
  std::string out(prefix);
  for (int shift = 60; shift >= 0; shift -= 4) out += kHex[(v >> shift) & 0xF];
  return out;
}

SandboxResponse SandboxService::handle(const SandboxRequest& request) {
  if (request.path == "/ping" && request.method == HttpMethod::Get) {
    return {200, Json{{"status", "ok"}}};
  }
  auto segments = split_path(request.path);
  const OperationSpec* op = nullptr;
  std::map<std::string, std::string> path_params;
  bool path_known = false;
  for (const auto& candidate : model_.operations) {
    auto params = match_template(candidate.path, segments);
    if (!params) continue;
    path_known = true;
    if (candidate.method == request.method) {
      op = &candidate;
      path_params = std::move(*params);
      break;
    }
  }
  if (!op) return path_known ? error(405, "Method Not Allowed") : error(404, "Not Found");

  ValidatedRequest v;
  v.operation = op;
  v.accept = request.header("accept");

  if (!op->security.empty()) {
    std::string auth = request.header("authorization");
    constexpr std::string_view kBearer = "Bearer ";
    if (auth.rfind(kBearer, 0) != 0 || !token_valid(auth.substr(kBearer.size()))) {
      return error(401, "Unauthorized");
    }
    v.bearer_token = auth.substr(kBearer.size());
  }

  if (op->request_body) {
    if (request.body.empty()) {
      if (op->request_body->required) return error(400, "Required request body is missing");
    } else {
      std::string content_type = request.header("content-type");
      if (content_type.find("json") == std::string::npos) {
        return error(415, "Unsupported Media Type");
      }
      v.body = Json::parse(request.body, nullptr, false);
      if (v.body.is_discarded()) return error(400, "Malformed JSON request body");
      if (!conforms(v.body, op->request_body->preferred().schema)) {
        return error(400, "Request body does not match the schema");
      }
    }
  }

  for (const auto& p : op->parameters) {
    std::vector<std::string> values;
    switch (p.location) {
      case ParamLocation::Path:
        if (auto it = path_params.find(p.name); it != path_params.end()) values.push_back(it->second);
        break;
      case ParamLocation::Query:
        for (const auto& [name, value] : request.query) {
          if (name == p.name) values.push_back(value);
        }
        break;
      case ParamLocation::Header: {
        std::string lower = p.name;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (auto it = request.headers.find(lower); it != request.headers.end()) {
          values.push_back(it->second);
        }
        break;
      }
      case ParamLocation::Cookie:
        break;
    }
    if (values.empty()) {
      if (p.required) return error(400, "Missing required parameter '" + p.name + "'");
      continue;
    }
    auto converted = convert_param(values, p.schema);
    if (!converted || !conforms(*converted, p.schema)) {
      return error(400, "Invalid value for parameter '" + p.name + "'");
    }
    if (p.location == ParamLocation::Path) {
      v.path[p.name] = values.front();
    } else {
      v.query[p.name] = std::move(*converted);
    }
  }
  return on_operation(v);
}

// --- market --------------------------------------------------------------------------

namespace {

class MarketService : public SandboxService {
 public:
  MarketService() : SandboxService("market", std::string(kMarketSpec)) {
    const std::pair<const char*, double> kCatalog[] = {
        {"books", 12.5}, {"games", 59.0}, {"music", 9.99}, {"tools", 24.0}, {"books", 31.0}};
    int n = 0;
    for (const auto& [category, price] : kCatalog) {
      std::string id = next_id("p");
      products_.push_back(Json{{"productId", id},
                               {"name", "Product " + std::to_string(++n)},
                               {"price", price},
                               {"category", category}});
    }
  }

  std::vector<SeededBug> bug_manifest() const override {
    return {
        {"addItemUsingPUT", "existing cart and product, quantity > 50",
         "java.lang.ArithmeticException: stock overflow"},
        {"updateContactsUsingPUT", "existing customer, phone omitted",
         "java.lang.IllegalStateException: phone is null"},
        {"getOrderUsingGET", "existing order, expand=customer",
         "org.hibernate.LazyInitializationException"},
        {"setDeliveryUsingPUT", "existing order, address.city longer than 10 characters",
         "java.lang.StringIndexOutOfBoundsException"},
        {"payByCardUsingPOST", "existing order, amount > 90",
         "com.market.PaymentGatewayException"},
    };
  }

 protected:
  bool token_valid(const std::string& token) const override { return tokens_.count(token) > 0; }

  SandboxResponse on_operation(const ValidatedRequest& r) override {
    const std::string& id = r.operation->id;
    const Json& body = r.body;
    if (id == "registerUserUsingPOST") {
      std::string username = body["username"].get<std::string>();
      if (users_.count(username)) return error(409, "Username already taken");
      std::string user_id = next_id("u");
      users_[username] = {body["password"].get<std::string>(), user_id};
      return {201, Json{{"userId", user_id}, {"username", username}}};
    }
    if (id == "loginUsingPOST") {
      auto it = users_.find(body["username"].get<std::string>());
      if (it == users_.end() || it->second.first != body["password"].get<std::string>()) {
        return error(401, "Bad credentials");
      }
      std::string token = next_id("tk");
      tokens_.insert(token);
      return {200, Json{{"token", token}, {"expiresIn", 3600}}};
    }
    if (id == "listProductsUsingGET") {
      Json out = Json::array();
      std::size_t limit = products_.size();
      if (auto it = r.query.find("limit"); it != r.query.end()) {
        limit = std::min<std::size_t>(limit, it->second.get<std::size_t>());
      }
      for (const auto& p : products_) {
        if (out.size() >= limit) break;
        if (auto it = r.query.find("category"); it != r.query.end() && p["category"] != it->second) {
          continue;
        }
        out.push_back(p);
      }
      return {200, out};
    }
    if (id == "getProductUsingGET") {
      if (!r.accept.empty() && r.accept.find("application/json") == std::string::npos &&
          r.accept.find("*/*") == std::string::npos) {
        return error(406, "Not Acceptable");
      }
      if (const Json* p = product(r.path.at("productId"))) return {200, *p};
      return error(404, "Product not found");
    }
    if (id == "createCustomerUsingPOST") {
      std::string customer_id = next_id("c");
      Json customer = {{"customerId", customer_id},
                       {"name", body["name"]},
                       {"email", body["email"]},
                       {"phone", nullptr},
                       {"age", body.contains("age") ? body["age"] : Json(nullptr)}};
      customers_[customer_id] = customer;
      return {201, customer};
    }
    if (id == "getCustomerUsingGET") {
      auto it = customers_.find(r.path.at("customerId"));
      if (it == customers_.end()) return error(404, "Customer not found");
      return {200, it->second};
    }
    if (id == "updateContactsUsingPUT") {
      auto it = customers_.find(r.path.at("customerId"));
      if (it == customers_.end()) return error(404, "Customer not found");
      if (!body.contains("phone")) {
        return server_error("java.lang.IllegalStateException: phone is null");
      }
      it->second["email"] = body["email"];
      it->second["phone"] = body["phone"];
      return {200, it->second};
    }
    if (id == "createCartUsingPOST") {
      std::string customer_id = body["customerId"].get<std::string>();
      if (!customers_.count(customer_id)) return error(404, "Customer not found");
      std::string cart_id = next_id("k");
      Json cart = {{"cartId", cart_id}, {"customerId", customer_id}, {"items", Json::array()}};
      carts_[cart_id] = cart;
      return {201, cart};
    }
    if (id == "addItemUsingPUT") {
      auto cart = carts_.find(r.path.at("cartId"));
      if (cart == carts_.end()) return error(404, "Cart not found");
      std::string product_id = body["productId"].get<std::string>();
      if (!product(product_id)) return error(404, "Product not found");
      long long quantity = body["quantity"].get<long long>();
      if (quantity > 50) {
        return server_error("java.lang.ArithmeticException: stock overflow for quantity " +
                            std::to_string(quantity));
      }
      cart->second["items"].push_back(Json{{"productId", product_id}, {"quantity", quantity}});
      return {200, cart->second};
    }
    if (id == "createOrderUsingPOST") {
      auto cart = carts_.find(body["cartId"].get<std::string>());
      if (cart == carts_.end()) return error(404, "Cart not found");
      double total = 0.0;
      for (const auto& item : cart->second["items"]) {
        total += (*product(item["productId"].get<std::string>()))["price"].get<double>() *
                 item["quantity"].get<double>();
      }
      std::string order_id = next_id("o");
      Json order = {{"orderId", order_id},
                    {"cartId", cart->first},
                    {"status", "NEW"},
                    {"total", total}};
      orders_[order_id] = order;
      return {201, order};
    }
    if (id == "getOrderUsingGET") {
      auto order = orders_.find(r.path.at("orderId"));
      if (order == orders_.end()) return error(404, "Order not found");
      if (auto it = r.query.find("expand"); it != r.query.end() && it->second == "customer") {
        return server_error(
            "org.hibernate.LazyInitializationException: could not initialize proxy - no Session");
      }
      return {200, order->second};
    }
    if (id == "setDeliveryUsingPUT") {
      auto order = orders_.find(r.path.at("orderId"));
      if (order == orders_.end()) return error(404, "Order not found");
      std::string city = body["address"]["city"].get<std::string>();
      if (city.size() > 10) {
        return server_error("java.lang.StringIndexOutOfBoundsException: begin 0, end 10, length " +
                            std::to_string(city.size()));
      }
      order->second["delivery"] = body;
      return {200, order->second};
    }
    if (id == "payByCardUsingPOST") {
      auto order = orders_.find(r.path.at("orderId"));
      if (order == orders_.end()) return error(404, "Order not found");
      if (body["amount"].get<double>() > 90.0) {
        return server_error("com.market.PaymentGatewayException: upstream gateway rejected the charge");
      }
      order->second["status"] = "PAID";
      return {200, Json{{"paymentId", next_id("y")}, {"orderId", order->first}, {"status", "PAID"}}};
    }
    return error(404, "Not Found");
  }

 private:
  const Json* product(const std::string& product_id) const {
    for (const auto& p : products_) {
      if (p["productId"] == product_id) return &p;
    }
    return nullptr;
  }

  std::vector<Json> products_;
  std::map<std::string, std::pair<std::string, std::string>> users_;  // name -> (password, id)
  std::set<std::string> tokens_;
  std::map<std::string, Json> customers_;
  std::map<std::string, Json> carts_;
  std::map<std::string, Json> orders_;
};

// --- chain3 --------------------------------------------------------------------------

class Chain3Service : public SandboxService {
 public:
  Chain3Service() : SandboxService("chain3", std::string(kChain3Spec)) {}

 protected:
  SandboxResponse on_operation(const ValidatedRequest& r) override {
    const std::string& id = r.operation->id;
    const Json& body = r.body;
    if (id == "createStore") {
      std::string store_id = next_id("s");
      Json store = {{"storeId", store_id}, {"name", body["name"]}};
      stores_[store_id] = store;
      return {201, store};
    }
    if (id == "createShelf") {
      const std::string& store_id = r.path.at("storeId");
      if (!stores_.count(store_id)) return error(404, "Store not found");
      std::string shelf_id = next_id("h");
      Json shelf = {{"shelfId", shelf_id}, {"storeId", store_id}, {"label", body["label"]}};
      shelves_[shelf_id] = shelf;
      return {201, shelf};
    }
    if (id == "createItem") {
      const std::string& shelf_id = r.path.at("shelfId");
      if (!shelves_.count(shelf_id)) return error(404, "Shelf not found");
      std::string item_id = next_id("i");
      Json item = {{"itemId", item_id},
                   {"shelfId", shelf_id},
                   {"sku", body["sku"]},
                   {"quantity", body["quantity"]}};
      items_[item_id] = item;
      return {201, item};
    }
    if (id == "getItem") {
      auto it = items_.find(r.path.at("itemId"));
      if (it == items_.end()) return error(404, "Item not found");
      return {200, it->second};
    }
    return error(404, "Not Found");
  }

 private:
  std::map<std::string, Json> stores_;
  std::map<std::string, Json> shelves_;
  std::map<std::string, Json> items_;
};

}  // namespace

std::unique_ptr<SandboxService> market_service() { return std::make_unique<MarketService>(); }
std::unique_ptr<SandboxService> chain3_service() { return std::make_unique<Chain3Service>(); }

std::unique_ptr<SandboxService> make_sandbox_service(std::string_view name) {
  if (name == "market") return market_service();
  if (name == "chain3") return chain3_service();
  return nullptr;
}

// --- HTTP server ------------------------------------------------------------------------

struct SandboxServer::Impl {
  httplib::Server server;
  std::mutex mutex;
};

SandboxServer::SandboxServer(std::unique_ptr<SandboxService> service)
    : service_(std::move(service)), impl_(std::make_unique<Impl>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    SandboxRequest request;
    request.method = parse_http_method(req.method).value_or(HttpMethod::Get);
    request.path = req.path;
    std::size_t q = req.target.find('?');
    if (q != std::string::npos) {
      httplib::Params params;
      httplib::detail::parse_query_text(req.target.substr(q + 1), params);
      request.query.assign(params.begin(), params.end());
    }
    for (const auto& [name, value] : req.headers) {
      std::string lower = name;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      request.headers.emplace(lower, value);
    }
    request.body = req.body;

    SandboxResponse response;
    {
      std::lock_guard<std::mutex> lock(impl_->mutex);
      try {
        response = service_->handle(request);
      } catch (const std::exception& e) {
        response = server_error(std::string("unhandled: ") + e.what());
      }
    }
    res.status = response.status;
    res.set_content(response.body.dump(), "application/json");
  };
  auto& s = impl_->server;
  s.set_keep_alive_max_count(100000);
  s.set_tcp_nodelay(true);
  s.set_socket_options(exclusive_listen_options);
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Put(".*", handler);
  s.Delete(".*", handler);
  s.Patch(".*", handler);
  s.Options(".*", handler);
}

SandboxServer::~SandboxServer() { stop(); }

std::string SandboxServer::start(int port) {
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

void SandboxServer::run(int port) {
  auto& s = impl_->server;
  if (!s.bind_to_port("127.0.0.1", port)) {
    throw PortInUse("port " + std::to_string(port) + " is already in use");
  }
  port_ = port;
  s.listen_after_bind();
}

void SandboxServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string SandboxServer::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

}  // namespace resttest
