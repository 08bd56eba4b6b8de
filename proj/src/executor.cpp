#include "resttest/executor.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <mutex>

#include "resttest/errors.hpp"
#include "resttest/http_util.hpp"

namespace resttest {

namespace {

std::string random_identifier(Rng& rng, std::size_t min_len, std::size_t max_len) {
  static constexpr std::string_view kAlphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
  std::uniform_int_distribution<std::size_t> length(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, kAlphabet.size() - 1);
  std::string out(length(rng), 'x');
  for (char& c : out) c = kAlphabet[pick(rng)];
  return out;
}

enum class JsonKind { String, Integer, Number, Boolean, Null, Array, Object };
constexpr JsonKind kAllKinds[] = {JsonKind::String, JsonKind::Integer, JsonKind::Number,
                                  JsonKind::Boolean, JsonKind::Null,   JsonKind::Array,
                                  JsonKind::Object};

JsonKind kind_of(const Json& v) {
  if (v.is_string()) return JsonKind::String;
  if (v.is_number_integer()) return JsonKind::Integer;
  if (v.is_number()) return JsonKind::Number;
  if (v.is_boolean()) return JsonKind::Boolean;
  if (v.is_array()) return JsonKind::Array;
  if (v.is_object()) return JsonKind::Object;
  return JsonKind::Null;
}

std::string_view kind_name(JsonKind k) {
  switch (k) {
    case JsonKind::String: return "string";
    case JsonKind::Integer: return "integer";
    case JsonKind::Number: return "number";
    case JsonKind::Boolean: return "boolean";
    case JsonKind::Null: return "null";
    case JsonKind::Array: return "array";
    case JsonKind::Object: return "object";
  }
  return "null";
}

Json random_value_of(JsonKind kind, Rng& rng) {
  switch (kind) {
    case JsonKind::String:
      return random_identifier(rng, 1, 16);
    case JsonKind::Integer: {
      std::uniform_int_distribution<long long> pick(-1000, 1000);
      return pick(rng);
    }
    case JsonKind::Number: {
      std::uniform_int_distribution<long long> pick(-1000, 1000);
      return static_cast<double>(pick(rng)) + 0.5;
    }
    case JsonKind::Boolean: {
      std::bernoulli_distribution coin(0.5);
      return coin(rng);
    }
    case JsonKind::Null:
      return nullptr;
    case JsonKind::Array: {
      std::uniform_int_distribution<long long> pick(-1000, 1000);
      return Json::array({pick(rng)});
    }
    case JsonKind::Object:
      return Json{{random_identifier(rng, 1, 8), random_identifier(rng, 1, 16)}};
  }
  return nullptr;
}

// The object holding top-level body properties (the first element of an
// array body), or null for primitive bodies.
Json* body_object(std::optional<Json>& body) {
  if (!body) return nullptr;
  if (body->is_object()) return &*body;
  if (body->is_array() && !body->empty() && body->front().is_object()) return &body->front();
  return nullptr;
}

struct ValueSlot {
  std::string label;
  Json* value = nullptr;
  std::vector<NamedValue>* list = nullptr;  // for renames of parameters
  std::size_t index = 0;
  std::string body_key;  // for renames of body properties
};

std::vector<ValueSlot> value_slots(RequestDraft& r, bool include_path) {
  std::vector<ValueSlot> slots;
  auto add_list = [&](std::vector<NamedValue>& list, std::string_view where) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      slots.push_back({std::string(where) + "." + list[i].name, &list[i].value, &list, i, {}});
    }
  };
  if (include_path) add_list(r.path_params, "path");
  add_list(r.query_params, "query");
  add_list(r.header_params, "header");
  add_list(r.cookie_params, "cookie");
  if (Json* obj = body_object(r.body)) {
    for (auto& [key, value] : obj->items()) {
      slots.push_back({"body." + key, &value, nullptr, 0, key});
    }
  } else if (r.body && include_path) {
    slots.push_back({"body", &*r.body, nullptr, 0, {}});
  }
  return slots;
}

std::string join_query(const std::vector<NamedValue>& params) {
  std::string out;
  auto append = [&](const std::string& name, const Json& v) {
    if (!out.empty()) out += '&';
    out += url_encode(name);
    out += '=';
    out += url_encode(scalar_text(v));
  };
  for (const auto& p : params) {
    if (p.value.is_array()) {
      for (const auto& element : p.value) append(p.name, element);
    } else {
      append(p.name, p.value);
    }
  }
  return out;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view to_string(ValueSource source) {
  switch (source) {
    case ValueSource::Llm: return kSourceLlm;
    case ValueSource::Dependency: return kSourceDependency;
    case ValueSource::Default: return kSourceDefault;
  }
  return kSourceDefault;
}

std::string_view to_string(MutationCategory category) {
  switch (category) {
    case MutationCategory::TypeAlteration: return "type_alteration";
    case MutationCategory::NameMutation: return "name_mutation";
    case MutationCategory::MediaTypeChange: return "media_type_change";
    case MutationCategory::RandomDependency: return "random_dependency";
    case MutationCategory::TokenChange: return "token_change";
  }
  return "type_alteration";
}

bool RequestDraft::operator==(const RequestDraft& o) const {
  auto same = [](const std::vector<NamedValue>& a, const std::vector<NamedValue>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                      [](const NamedValue& x, const NamedValue& y) {
                        return x.name == y.name && x.value == y.value &&
                               x.from_dependency == y.from_dependency;
                      });
  };
  return operation_id == o.operation_id && method == o.method && base_url == o.base_url &&
         path_template == o.path_template && same(path_params, o.path_params) &&
         same(query_params, o.query_params) && same(header_params, o.header_params) &&
         same(cookie_params, o.cookie_params) && body == o.body &&
         content_type == o.content_type && accept == o.accept &&
         bearer_token == o.bearer_token && dependency_body_paths == o.dependency_body_paths;
}

std::string scalar_text(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

void set_body_path(Json& body, std::string_view path, const Json& value,
                   const SchemaNode& schema) {
  Json* node = &body;
  const SchemaNode* sch = &schema;
  while (true) {
    if (!node->is_object()) *node = Json::object();
    std::size_t dot = path.find('.');
    std::string key(path.substr(0, dot));
    if (dot == std::string_view::npos) {
      (*node)[key] = value;
      return;
    }
    const SchemaNode* child = sch ? sch->property(key) : nullptr;
    Json& slot = (*node)[key];
    if (child && child->kind == SchemaKind::Array && child->items) {
      if (!slot.is_array() || slot.empty()) slot = Json::array({Json::object()});
      node = &slot.front();
      sch = child->items.get();
    } else {
      node = &slot;
      sch = child;
    }
    path = path.substr(dot + 1);
  }
}

RequestDraft build_request(const RequestPlan& plan, const ApiModel& model) {
  const OperationSpec* op = model.find(plan.operation_id);
  if (!op) throw UnknownOperation("unknown operation '" + plan.operation_id + "'");
  OperationAgentInfo info = describe_operation(*op);

  RequestDraft draft;
  draft.operation_id = op->id;
  draft.method = op->method;
  draft.base_url = model.base_url;
  draft.path_template = op->path;
  draft.bearer_token = plan.bearer_token;

  const SchemaNode* body_root = nullptr;
  if (op->request_body) {
    body_root = &op->request_body->preferred().schema;
    if (info.body_is_array) body_root = body_root->items.get();
    draft.content_type =
        plan.media_type.empty() ? op->request_body->preferred().media_type : plan.media_type;
  }
  Json body = Json::object();
  bool body_touched = false;

  for (const auto& field : plan.fields) {
    auto vf = std::find_if(info.value_fields.begin(), info.value_fields.end(),
                           [&](const ValueField& v) { return v.path == field.path; });
    if (vf == info.value_fields.end()) continue;
    const SelectableItem& item = info.items[vf->item];
    bool from_dependency = field.source == ValueSource::Dependency;
    if (!item.is_body) {
      NamedValue nv{item.name, field.value, from_dependency};
      switch (*item.location) {
        case ParamLocation::Path: draft.path_params.push_back(std::move(nv)); break;
        case ParamLocation::Query: draft.query_params.push_back(std::move(nv)); break;
        case ParamLocation::Header: draft.header_params.push_back(std::move(nv)); break;
        case ParamLocation::Cookie: draft.cookie_params.push_back(std::move(nv)); break;
      }
      continue;
    }
    body_touched = true;
    if (info.primitive_body) {
      body = field.value;
    } else {
      set_body_path(body, vf->body_path, field.value, *body_root);
      if (from_dependency) draft.dependency_body_paths.push_back(vf->body_path);
    }
  }

  if (op->request_body && (body_touched || op->request_body->required)) {
    draft.body = info.body_is_array ? Json::array({std::move(body)}) : std::move(body);
  }

  std::size_t pos = 0;
  while ((pos = op->path.find('{', pos)) != std::string::npos) {
    std::size_t end = op->path.find('}', pos);
    std::string name = op->path.substr(pos + 1, end - pos - 1);
    bool found = std::any_of(draft.path_params.begin(), draft.path_params.end(),
                             [&](const NamedValue& p) { return p.name == name; });
    if (!found) {
      throw MissingPathParam(op->id + ": no value for path parameter '" + name + "'");
    }
    pos = end + 1;
  }
  return draft;
}

std::string serialize_body(const Json& body, std::string_view content_type) {
  if (content_type.find("x-www-form-urlencoded") != std::string_view::npos) {
    std::string out;
    if (body.is_object()) {
      for (const auto& [key, value] : body.items()) {
        if (!out.empty()) out += '&';
        out += url_encode(key) + "=" + url_encode(scalar_text(value));
      }
      return out;
    }
    return "value=" + url_encode(scalar_text(body));
  }
  if (content_type.rfind("text/", 0) == 0) return scalar_text(body);
  return body.dump();
}

WireRequest render_request(const RequestDraft& draft) {
  std::string path = draft.path_template;
  for (const auto& p : draft.path_params) {
    std::string placeholder = "{" + p.name + "}";
    std::string encoded = url_encode(scalar_text(p.value));
    for (std::size_t pos; (pos = path.find(placeholder)) != std::string::npos;) {
      path.replace(pos, placeholder.size(), encoded);
    }
  }
  std::string query = join_query(draft.query_params);
  if (!query.empty()) path += "?" + query;

  WireRequest wire;
  wire.method = draft.method;
  wire.url = draft.base_url + path;
  auto url = parse_url(draft.base_url);
  wire.target = (url ? url->base_path : std::string()) + path;
  wire.headers.emplace_back("Accept", draft.accept);
  for (const auto& h : draft.header_params) wire.headers.emplace_back(h.name, scalar_text(h.value));
  if (!draft.cookie_params.empty()) {
    std::string cookie;
    for (const auto& c : draft.cookie_params) {
      if (!cookie.empty()) cookie += "; ";
      cookie += c.name + "=" + url_encode(scalar_text(c.value));
    }
    wire.headers.emplace_back("Cookie", cookie);
  }
  if (draft.bearer_token) wire.headers.emplace_back("Authorization", "Bearer " + *draft.bearer_token);
  if (draft.body) {
    wire.content_type = draft.content_type.empty() ? "application/json" : draft.content_type;
    wire.headers.emplace_back("Content-Type", wire.content_type);
    wire.body = serialize_body(*draft.body, wire.content_type);
  }
  return wire;
}

// --- mutation ---------------------------------------------------------------------

MutationResult mutate_request(const RequestDraft& request, const MutationConfig& cfg,
                              Rng& rng, const ResponseStore* store) {
  MutationResult result{request, {}};
  std::bernoulli_distribution mutate(std::clamp(cfg.mutation_rate, 0.0, 1.0));
  if (!mutate(rng)) return result;

  RequestDraft& r = result.request;
  auto dependency_params = [&] {
    std::vector<NamedValue*> out;
    for (auto* list : {&r.path_params, &r.query_params, &r.header_params, &r.cookie_params}) {
      for (auto& p : *list) {
        if (p.from_dependency) out.push_back(&p);
      }
    }
    return out;
  };

  std::array<bool, kMutationCategories> applicable{};
  applicable[0] = !value_slots(r, true).empty();
  applicable[1] = !value_slots(r, false).empty();
  applicable[2] = true;
  applicable[3] = store && !store->empty() &&
                  (!dependency_params().empty() || !r.dependency_body_paths.empty());
  applicable[4] = r.bearer_token.has_value();

  std::array<double, kMutationCategories> weights{};
  double total = 0.0;
  for (std::size_t i = 0; i < kMutationCategories; ++i) {
    weights[i] = applicable[i] ? std::max(cfg.weights[i], 0.0) : 0.0;
    total += weights[i];
  }
  if (total <= 0.0) return result;
  std::discrete_distribution<std::size_t> pick_category(weights.begin(), weights.end());
  auto category = static_cast<MutationCategory>(pick_category(rng));
  std::string entry(to_string(category));

  switch (category) {
    case MutationCategory::TypeAlteration: {
      auto slots = value_slots(r, true);
      std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
      ValueSlot& slot = slots[pick(rng)];
      JsonKind from = kind_of(*slot.value);
      std::vector<JsonKind> others;
      for (JsonKind k : kAllKinds) {
        if (k != from) others.push_back(k);
      }
      std::uniform_int_distribution<std::size_t> pick_kind(0, others.size() - 1);
      JsonKind to = others[pick_kind(rng)];
      *slot.value = random_value_of(to, rng);
      entry += ": " + slot.label + " " + std::string(kind_name(from)) + "->" +
               std::string(kind_name(to));
      break;
    }
    case MutationCategory::NameMutation: {
      auto slots = value_slots(r, false);
      std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
      ValueSlot slot = slots[pick(rng)];
      std::string new_name = random_identifier(rng, 1, 16);
      if (slot.list) {
        (*slot.list)[slot.index].name = new_name;
      } else {
        Json* obj = body_object(r.body);
        Json moved = std::move((*obj)[slot.body_key]);
        obj->erase(slot.body_key);
        (*obj)[new_name] = std::move(moved);
      }
      entry += ": " + slot.label + " -> " + new_name;
      break;
    }
    case MutationCategory::MediaTypeChange: {
      std::string current = r.body ? r.content_type : r.accept;
      std::vector<std::string_view> choices;
      for (auto mt : kMutationMediaTypes) {
        if (mt != current) choices.push_back(mt);
      }
      std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
      std::string chosen(choices[pick(rng)]);
      if (r.body) r.content_type = chosen;
      r.accept = chosen;
      entry += ": " + current + " -> " + chosen;
      break;
    }
    case MutationCategory::RandomDependency: {
      auto params = dependency_params();
      std::size_t choices = params.size() + r.dependency_body_paths.size();
      std::uniform_int_distribution<std::size_t> pick(0, choices - 1);
      std::size_t which = pick(rng);
      auto histories = store->all_histories();
      std::uniform_int_distribution<std::size_t> pick_history(0, histories.size() - 1);
      const auto& history = *histories[pick_history(rng)];
      std::uniform_int_distribution<std::size_t> pick_value(0, history.size() - 1);
      const Json& replacement = history[pick_value(rng)];
      if (which < params.size()) {
        params[which]->value = replacement;
        entry += ": " + params[which]->name;
      } else {
        const std::string& path = r.dependency_body_paths[which - params.size()];
        if (Json* obj = body_object(r.body)) set_body_path(*obj, path, replacement, SchemaNode{});
        entry += ": body." + path;
      }
      break;
    }
    case MutationCategory::TokenChange: {
      std::bernoulli_distribution drop(0.5);
      if (drop(rng)) {
        r.bearer_token.reset();
        entry += ": dropped";
      } else {
        r.bearer_token = random_identifier(rng, 1, 16);
        entry += ": replaced";
      }
      break;
    }
  }
  result.log.push_back(std::move(entry));
  return result;
}

// --- dispatch ---------------------------------------------------------------------

struct HttpDispatcher::Impl {
  std::chrono::milliseconds timeout;
  std::map<std::string, std::unique_ptr<httplib::Client>> clients;

  httplib::Client& client(const std::string& origin) {
    auto& slot = clients[origin];
    if (!slot) {
      slot = std::make_unique<httplib::Client>(origin);
      auto sec = static_cast<time_t>(timeout.count() / 1000);
      auto usec = static_cast<time_t>((timeout.count() % 1000) * 1000);
      slot->set_connection_timeout(sec, usec);
      slot->set_read_timeout(sec, usec);
      slot->set_write_timeout(sec, usec);
      slot->set_keep_alive(true);
      slot->set_url_encode(false);
      slot->set_tcp_nodelay(true);
    }
    return *slot;
  }
};

HttpDispatcher::HttpDispatcher(std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
  impl_->timeout = timeout;
}

HttpDispatcher::~HttpDispatcher() = default;

HttpExchange HttpDispatcher::send(const WireRequest& request, std::string_view operation_id) {
  HttpExchange exchange;
  exchange.operation_id = std::string(operation_id);
  exchange.method = std::string(to_string(request.method));
  exchange.url = request.url;
  exchange.request_headers = request.headers;
  exchange.request_body = request.body;

  auto url = parse_url(request.url);
  if (!url) {
    exchange.transport_error = "invalid url";
    return exchange;
  }
  httplib::Request req;
  req.method = exchange.method;
  req.path = request.target;
  for (const auto& [name, value] : request.headers) req.headers.emplace(name, value);
  req.body = request.body;

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  auto started = std::chrono::steady_clock::now();
  bool ok = impl_->client(url->origin()).send(req, res, err);
  exchange.latency = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - started);
  if (!ok || err != httplib::Error::Success) {
    exchange.transport_error = httplib::to_string(err);
    return exchange;
  }
  exchange.status = res.status;
  exchange.response_body = res.body.size() > kMaxResponseBody
                               ? res.body.substr(0, kMaxResponseBody)
                               : res.body;
  return exchange;
}

HttpExchange send_request(const WireRequest& request, std::chrono::milliseconds timeout,
                          std::string_view operation_id) {
  HttpDispatcher dispatcher(timeout);
  return dispatcher.send(request, operation_id);
}

// --- response handling --------------------------------------------------------------

std::string normalize_error_body(std::string_view body) {
  std::string out;
  std::size_t i = 0;
  while (i < body.size()) {
    if (!is_alnum(body[i])) {
      out += body[i++];
      continue;
    }
    std::size_t end = i;
    while (end < body.size() && is_alnum(body[end])) ++end;
    std::string_view token = body.substr(i, end - i);
    bool all_hex = std::all_of(token.begin(), token.end(), is_hex);
    bool has_digit = std::any_of(token.begin(), token.end(), is_digit);
    if (all_hex && (has_digit || token.size() >= 8)) {
      out += '#';
    } else {
      // Mixed tokens such as "o3fa9c02": mask each hex run holding a digit.
      for (std::size_t j = 0; j < token.size();) {
        if (!is_hex(token[j])) {
          out += token[j++];
          continue;
        }
        std::size_t run_end = j;
        while (run_end < token.size() && is_hex(token[run_end])) ++run_end;
        std::string_view run = token.substr(j, run_end - j);
        if (std::any_of(run.begin(), run.end(), is_digit)) {
          out += '#';
        } else {
          out += run;
        }
        j = run_end;
      }
    }
    i = end;
  }
  return out;
}

std::string dedup_key(std::string_view operation_id, int status, std::string_view body) {
  std::string key(operation_id);
  key += '|';
  key += std::to_string(status);
  key += '|';
  key += normalize_error_body(body);
  return key;
}

Outcome handle_response(const HttpExchange& exchange, const RequestPlan& plan,
                        const RequestDraft& sent, HandleContext& ctx) {
  Outcome outcome;
  RunState& run = ctx.run;
  ++run.total_requests;
  if (exchange.is_transport_error()) {
    ++run.transport_errors;
    outcome.transport_error = true;
    return outcome;
  }
  const std::string& op_id = plan.operation_id;
  outcome.status_class = classify_status(exchange.status);
  outcome.newly_successful_operation = run.record_status(op_id, exchange.status);

  if (outcome.status_class == StatusClass::Success) {
    if (exchange.mutation_log.empty()) {
      for (const auto& f : plan.fields) ctx.store.record(op_id, f.path, f.value);
    }
    const OperationSpec* op = ctx.model.find(op_id);
    Json response = Json::parse(exchange.response_body, nullptr, false);
    if (op && !response.is_discarded()) {
      for (const auto& field : list_io_fields(*op).outputs) {
        for (auto& value : extract_path(response, field.path)) {
          ctx.store.record(op_id, field.path, std::move(value));
        }
      }
      if (ctx.tokens && is_account_operation(*op)) {
        if (auto name = token_field(*op)) {
          auto values = extract_path(response, *name);
          if (!values.empty() && values.front().is_string()) {
            (*ctx.tokens)[op_id] = values.front().get<std::string>();
          }
        }
      }
    }

    Json params = Json::object();
    for (const auto* list : {&sent.path_params, &sent.query_params, &sent.header_params,
                             &sent.cookie_params}) {
      for (const auto& p : *list) params[p.name] = p.value;
    }
    if (!params.empty()) run.successful_parameters.add(op_id, params);
    if (sent.body) {
      const Json& b = *sent.body;
      bool has_properties = (b.is_object() && !b.empty()) ||
                            (b.is_array() && !b.empty() && b.front().is_object());
      if (has_properties) {
        run.successful_bodies.add(op_id, b);
      } else {
        run.successful_primitives.add(op_id, b);
      }
    }
  }

  bool success = outcome.status_class == StatusClass::Success;
  for (const auto& f : plan.fields) {
    if (f.source == ValueSource::Dependency && f.edge_id) {
      record_observation(ctx.graph, *f.edge_id, success);
    }
  }

  if (outcome.status_class == StatusClass::ServerError) {
    outcome.newly_unique_error = run.record_server_error(
        dedup_key(op_id, exchange.status, exchange.response_body), exchange);
  }
  if (ctx.agents) delegate_rewards(*ctx.agents, plan.provenance, exchange.status, ctx.rule);
  return outcome;
}

}  // namespace resttest
