#include <httplib.h>

#include <algorithm>
#include <array>
#include <cctype>

#include "resttest/errors.hpp"
#include "resttest/http_util.hpp"
#include "resttest/valuesources.hpp"

namespace resttest {

namespace {

struct KnownPrice {
  std::string_view prefix;
  ModelPrice price;
};

// Longest prefixes first so "gpt-4o-mini" wins over "gpt-4o".
constexpr std::array<KnownPrice, 4> kPrices = {{
    {"gpt-4o-mini", {0.15e-6, 0.60e-6}},
    {"o1-mini", {3.0e-6, 12.0e-6}},
    {"gpt-4o", {2.50e-6, 10.0e-6}},
    {"o1", {15.0e-6, 60.0e-6}},
}};

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string strip_code_fence(std::string_view content) {
  std::string text = trim(content);
  if (text.rfind("```", 0) != 0) return text;
  std::size_t newline = text.find('\n');
  std::size_t close = text.rfind("```");
  if (newline == std::string::npos || close <= newline) return text;
  return trim(std::string_view(text).substr(newline + 1, close - newline - 1));
}

Json describe_field(const TargetField& field) {
  Json out = {{"name", field.path}, {"type", std::string(to_string(field.schema.kind))}};
  if (field.schema.format) out["format"] = *field.schema.format;
  if (field.schema.enum_values) out["enum"] = Json(*field.schema.enum_values);
  if (field.schema.example) out["example"] = *field.schema.example;
  return out;
}

}  // namespace

std::optional<ModelPrice> builtin_price(std::string_view model_name) {
  for (const auto& known : kPrices) {
    if (model_name.substr(0, known.prefix.size()) == known.prefix) return known.price;
  }
  return std::nullopt;
}

ModelPrice effective_price(const LlmConfig& cfg) {
  ModelPrice price = builtin_price(cfg.model_name).value_or(ModelPrice{});
  if (cfg.price_per_input_token >= 0.0) price.input = cfg.price_per_input_token;
  if (cfg.price_per_output_token >= 0.0) price.output = cfg.price_per_output_token;
  return price;
}

double CostTracker::track(const TokenUsage& usage, const LlmConfig& cfg) {
  ModelPrice price = effective_price(cfg);
  tokens_.input_tokens += usage.input_tokens;
  tokens_.output_tokens += usage.output_tokens;
  total_ += static_cast<double>(usage.input_tokens) * price.input +
            static_cast<double>(usage.output_tokens) * price.output;
  return total_;
}

double track_cost(CostTracker& tracker, const TokenUsage& usage, const LlmConfig& cfg) {
  return tracker.track(usage, cfg);
}

std::string build_llm_prompt(const ValueRequest& req) {
  Json fields = Json::array();
  for (const auto& f : req.target_fields) fields.push_back(describe_field(f));
  std::string prompt =
      "Generate realistic input values for one REST API request.\n"
      "Operation: " + req.operation->id + "\n"
      "Method: " + std::string(to_string(req.operation->method)) + "\n"
      "Path: " + req.operation->path + "\n"
      "Fields (JSON): " + fields.dump() + "\n";
  if (!req.prior_statuses.empty()) {
    prompt += "Earlier attempts returned status codes:";
    for (int s : req.prior_statuses) prompt += " " + std::to_string(s);
    prompt += "\n";
  }
  prompt +=
      "Reply with only a JSON object that maps every field name to a value of "
      "the listed type.";
  return prompt;
}

Json build_llm_request(const ValueRequest& req, const LlmConfig& cfg) {
  return {{"model", cfg.model_name},
          {"temperature", cfg.temperature},
          {"max_tokens", cfg.max_tokens},
          {"messages", Json::array({Json{{"role", "user"},
                                         {"content", build_llm_prompt(req)}}})}};
}

std::optional<Json> coerce_value(const Json& value, const SchemaNode& schema) {
  std::optional<Json> out;
  switch (schema.kind) {
    case SchemaKind::Integer:
      if (value.is_number_integer()) {
        out = value;
      } else if (value.is_number_float() && value.get<double>() == std::floor(value.get<double>())) {
        out = static_cast<long long>(value.get<double>());
      } else if (value.is_string()) {
        std::string text = trim(value.get<std::string>());
        std::size_t used = 0;
        try {
          long long n = std::stoll(text, &used);
          if (used == text.size() && !text.empty()) out = n;
        } catch (const std::exception&) {
        }
      }
      break;
    case SchemaKind::Number:
      if (value.is_number()) {
        out = value;
      } else if (value.is_string()) {
        std::string text = trim(value.get<std::string>());
        std::size_t used = 0;
        try {
          double x = std::stod(text, &used);
          if (used == text.size() && !text.empty()) out = x;
        } catch (const std::exception&) {
        }
      }
      break;
    case SchemaKind::Boolean:
      if (value.is_boolean()) {
        out = value;
      } else if (value.is_string()) {
        std::string text = trim(value.get<std::string>());
        std::transform(text.begin(), text.end(), text.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (text == "true") out = true;
        if (text == "false") out = false;
      }
      break;
    case SchemaKind::String:
      if (value.is_string()) {
        out = value;
      } else if (value.is_number() || value.is_boolean()) {
        out = value.dump();
      }
      break;
    case SchemaKind::Array:
      if (value.is_array()) out = value;
      break;
    case SchemaKind::Object:
      if (value.is_object()) out = value;
      break;
    case SchemaKind::Null:
      if (value.is_null()) out = value;
      break;
  }
  if (out && schema.enum_values &&
      std::find(schema.enum_values->begin(), schema.enum_values->end(), *out) ==
          schema.enum_values->end()) {
    return std::nullopt;
  }
  return out;
}

std::map<std::string, Json> parse_llm_content(std::string_view content,
                                              const ValueRequest& req) {
  Json reply = Json::parse(strip_code_fence(content), nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) {
    throw MalformedLlmReply("LLM reply is not a JSON object");
  }
  std::map<std::string, Json> values;
  for (const auto& field : req.target_fields) {
    auto it = reply.find(field.path);
    if (it == reply.end()) continue;
    if (auto coerced = coerce_value(*it, field.schema)) values.emplace(field.path, *coerced);
  }
  return values;
}

LlmResult llm_generate(const ValueRequest& req, const LlmConfig& cfg) {
  auto url = parse_url(cfg.base_url);
  if (!url) throw LlmUnavailable("invalid LLM base url '" + cfg.base_url + "'");
  httplib::Client client(url->origin());
  auto seconds = static_cast<time_t>(cfg.timeout_seconds);
  auto micros = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  httplib::Headers headers;
  if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

  auto res = client.Post(url->base_path + "/chat/completions", headers,
                         build_llm_request(req, cfg).dump(), "application/json");
  if (!res) throw LlmUnavailable("LLM request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw LlmUnavailable("LLM endpoint returned HTTP " + std::to_string(res->status));
  }
  Json body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw MalformedLlmReply("LLM response is not JSON");
  const Json* content = nullptr;
  if (auto choices = body.find("choices");
      choices != body.end() && choices->is_array() && !choices->empty()) {
    const Json& first = choices->front();
    if (auto msg = first.find("message"); msg != first.end() && msg->is_object()) {
      if (auto c = msg->find("content"); c != msg->end() && c->is_string()) content = &*c;
    }
  }
  if (!content) throw MalformedLlmReply("LLM response has no message content");

  LlmResult result;
  result.values = parse_llm_content(content->get<std::string>(), req);
  if (auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
    result.usage.input_tokens = usage->value("prompt_tokens", std::uint64_t{0});
    result.usage.output_tokens = usage->value("completion_tokens", std::uint64_t{0});
  }
  return result;
}

}  // namespace resttest
