#include "resttest/oasmodel.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include "resttest/errors.hpp"

namespace resttest {

namespace {

SchemaNode schema_of(SchemaKind kind) {
  SchemaNode node;
  node.kind = kind;
  return node;
}

constexpr std::pair<HttpMethod, std::string_view> kMethodNames[] = {
    {HttpMethod::Get, "get"},         {HttpMethod::Put, "put"},
    {HttpMethod::Post, "post"},       {HttpMethod::Delete, "delete"},
    {HttpMethod::Options, "options"}, {HttpMethod::Head, "head"},
    {HttpMethod::Patch, "patch"},
};

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// --- document loading -------------------------------------------------------

Json yaml_scalar(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted scalar
  static const std::regex int_re(R"([-+]?[0-9]+)");
  static const std::regex float_re(
      R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  if (text.empty() || text == "~" || text == "null" || text == "Null" ||
      text == "NULL") {
    return nullptr;
  }
  if (text == "true" || text == "True" || text == "TRUE") return true;
  if (text == "false" || text == "False" || text == "FALSE") return false;
  if (std::regex_match(text, int_re)) {
    try {
      return std::stoll(text);
    } catch (const std::out_of_range&) {
      return std::stod(text);
    }
  }
  if (std::regex_match(text, float_re)) return std::stod(text);
  if (text == ".inf" || text == "+.inf") return std::numeric_limits<double>::infinity();
  if (text == "-.inf") return -std::numeric_limits<double>::infinity();
  return text;
}

Json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return yaml_scalar(node);
    case YAML::NodeType::Sequence: {
      Json out = Json::array();
      for (const auto& child : node) out.push_back(yaml_to_json(child));
      return out;
    }
    case YAML::NodeType::Map: {
      Json out = Json::object();
      for (const auto& kv : node) {
        out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      }
      return out;
    }
  }
  return nullptr;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

bool looks_like_json(std::string_view text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{' || c == '[';
  }
  return false;
}

// --- reference resolution ---------------------------------------------------

std::string unescape_pointer_token(std::string token) {
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] == '~' && i + 1 < token.size()) {
      out += token[i + 1] == '1' ? '/' : '~';
      ++i;
    } else {
      out += token[i];
    }
  }
  return out;
}

class Resolver {
 public:
  Resolver(const Json& root, int max_ref_depth)
      : root_(root), max_ref_depth_(max_ref_depth) {}

  const Json& lookup(const std::string& ref) const {
    if (ref.empty() || ref[0] != '#') throw UnresolvedRef(ref);
    const Json* node = &root_;
    std::size_t pos = 1;
    while (pos < ref.size()) {
      if (ref[pos] != '/') throw UnresolvedRef(ref);
      std::size_t next = ref.find('/', pos + 1);
      std::string token = unescape_pointer_token(
          ref.substr(pos + 1, next == std::string::npos ? std::string::npos
                                                        : next - pos - 1));
      if (node->is_object()) {
        auto it = node->find(token);
        if (it == node->end()) throw UnresolvedRef(ref);
        node = &*it;
      } else if (node->is_array()) {
        std::size_t index = 0;
        try {
          index = std::stoul(token);
        } catch (const std::exception&) {
          throw UnresolvedRef(ref);
        }
        if (index >= node->size()) throw UnresolvedRef(ref);
        node = &(*node)[index];
      } else {
        throw UnresolvedRef(ref);
      }
      pos = next == std::string::npos ? ref.size() : next;
    }
    return *node;
  }

  // Follows $ref chains on non-schema objects (parameters, bodies, responses).
  const Json& deref(const Json& node) const {
    const Json* current = &node;
    std::set<std::string> seen;
    while (current->is_object() && current->contains("$ref")) {
      std::string ref = (*current)["$ref"].get<std::string>();
      if (!seen.insert(ref).second) {
        throw ValidationError("reference cycle through " + ref);
      }
      current = &lookup(ref);
    }
    return *current;
  }

  SchemaNode schema(const Json& node) {
    if (!node.is_object()) return schema_of(SchemaKind::String);
    if (auto ref = node.find("$ref"); ref != node.end()) {
      std::string pointer = ref->get<std::string>();
      const Json& target = lookup(pointer);
      int depth = static_cast<int>(
          std::count(stack_.begin(), stack_.end(), pointer));
      if (depth >= max_ref_depth_) return schema_of(SchemaKind::Null);
      stack_.push_back(pointer);
      SchemaNode out = schema(target);
      stack_.pop_back();
      return out;
    }
    if (auto all = node.find("allOf"); all != node.end() && all->is_array()) {
      SchemaNode merged = schema_of(SchemaKind::Object);
      bool any_object = false;
      for (const auto& part : *all) {
        SchemaNode sub = schema(part);
        if (sub.kind != SchemaKind::Object) {
          if (!any_object) merged = sub;
          continue;
        }
        any_object = true;
        merge_object(merged, sub);
      }
      Json rest = node;
      rest.erase("allOf");
      if (rest.contains("properties") || rest.contains("required")) {
        merged.kind = SchemaKind::Object;
        merge_object(merged, schema(rest));
      }
      return merged;
    }
    for (const char* key : {"oneOf", "anyOf"}) {
      if (auto alt = node.find(key);
          alt != node.end() && alt->is_array() && !alt->empty()) {
        return schema(alt->front());
      }
    }

    SchemaNode out;
    out.kind = infer_kind(node);
    if (auto e = node.find("enum"); e != node.end() && e->is_array()) {
      out.enum_values = std::vector<Json>(e->begin(), e->end());
    }
    if (auto ex = node.find("example"); ex != node.end()) out.example = *ex;
    if (auto f = node.find("format"); f != node.end() && f->is_string()) {
      out.format = f->get<std::string>();
    }
    auto number = [&](const char* key) -> std::optional<double> {
      auto it = node.find(key);
      if (it == node.end() || !it->is_number()) return std::nullopt;
      return it->get<double>();
    };
    auto size = [&](const char* key) -> std::optional<std::size_t> {
      auto it = node.find(key);
      if (it == node.end() || !it->is_number_integer() || it->get<long long>() < 0) {
        return std::nullopt;
      }
      return it->get<std::size_t>();
    };
    out.constraints.minimum = number("minimum");
    out.constraints.maximum = number("maximum");
    out.constraints.min_length = size("minLength");
    out.constraints.max_length = size("maxLength");
    if (auto p = node.find("pattern"); p != node.end() && p->is_string()) {
      out.constraints.pattern = p->get<std::string>();
    }

    if (out.kind == SchemaKind::Object) {
      if (auto props = node.find("properties");
          props != node.end() && props->is_object()) {
        for (const auto& [name, child] : props->items()) {
          out.properties.emplace_back(name, schema(child));
        }
      }
      if (auto req = node.find("required"); req != node.end() && req->is_array()) {
        for (const auto& name : *req) {
          if (name.is_string()) out.required.push_back(name.get<std::string>());
        }
      }
    } else if (out.kind == SchemaKind::Array) {
      auto items = node.find("items");
      out.items = std::make_shared<const SchemaNode>(
          items != node.end() ? schema(*items)
                              : schema_of(SchemaKind::String));
    }
    return out;
  }

 private:
  static SchemaKind infer_kind(const Json& node) {
    if (auto type = node.find("type"); type != node.end()) {
      if (type->is_string()) {
        if (auto kind = parse_schema_kind(type->get<std::string>())) return *kind;
      } else if (type->is_array()) {
        for (const auto& t : *type) {
          if (!t.is_string() || t == "null") continue;
          if (auto kind = parse_schema_kind(t.get<std::string>())) return *kind;
        }
        return SchemaKind::Null;
      }
    }
    if (node.contains("properties")) return SchemaKind::Object;
    if (node.contains("items")) return SchemaKind::Array;
    if (auto e = node.find("enum"); e != node.end() && e->is_array() && !e->empty()) {
      const Json& first = e->front();
      if (first.is_boolean()) return SchemaKind::Boolean;
      if (first.is_number_integer()) return SchemaKind::Integer;
      if (first.is_number()) return SchemaKind::Number;
    }
    return SchemaKind::String;
  }

  static void merge_object(SchemaNode& into, const SchemaNode& from) {
    for (const auto& [name, child] : from.properties) {
      if (!into.property(name)) into.properties.emplace_back(name, child);
    }
    for (const auto& name : from.required) {
      if (!into.is_required(name)) into.required.push_back(name);
    }
    if (!into.example && from.example) into.example = from.example;
  }

  const Json& root_;
  int max_ref_depth_;
  std::vector<std::string> stack_;
};

// --- operations ---------------------------------------------------------------

std::optional<ParamLocation> parse_location(std::string_view text) {
  if (text == "path") return ParamLocation::Path;
  if (text == "query") return ParamLocation::Query;
  if (text == "header") return ParamLocation::Header;
  if (text == "cookie") return ParamLocation::Cookie;
  return std::nullopt;
}

std::string string_field(const Json& node, const char* key) {
  auto it = node.find(key);
  if (it == node.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

const Json* preferred_media(const Json& content, std::string* media_type) {
  if (!content.is_object() || content.empty()) return nullptr;
  auto it = content.find("application/json");
  if (it == content.end()) {
    for (auto candidate = content.begin(); candidate != content.end(); ++candidate) {
      if (candidate.key().find("json") != std::string::npos) {
        it = candidate;
        break;
      }
    }
  }
  if (it == content.end()) it = content.begin();
  if (media_type) *media_type = it.key();
  return &*it;
}

ParameterSpec convert_parameter(Resolver& resolver, const Json& raw,
                                const std::string& where) {
  const Json& node = resolver.deref(raw);
  ParameterSpec param;
  param.name = string_field(node, "name");
  if (param.name.empty()) throw ValidationError(where + ": parameter without a name");
  auto location = parse_location(string_field(node, "in"));
  if (!location) {
    throw ValidationError(where + ": parameter '" + param.name +
                          "' has invalid location '" + string_field(node, "in") + "'");
  }
  param.location = *location;
  param.required = node.value("required", false);
  if (auto schema = node.find("schema"); schema != node.end()) {
    param.schema = resolver.schema(*schema);
  } else if (auto content = node.find("content"); content != node.end()) {
    const Json* media = preferred_media(*content, nullptr);
    param.schema = media && media->contains("schema")
                       ? resolver.schema((*media)["schema"])
                       : schema_of(SchemaKind::String);
  } else {
    param.schema = schema_of(SchemaKind::String);
  }
  if (param.location == ParamLocation::Path) param.required = true;
  return param;
}

std::vector<std::string> template_names(const std::string& path) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = path.find('{', pos)) != std::string::npos) {
    std::size_t end = path.find('}', pos);
    if (end == std::string::npos) break;
    names.push_back(path.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return names;
}

std::vector<std::string> security_names(const Json& requirements) {
  std::vector<std::string> names;
  if (!requirements.is_array()) return names;
  for (const auto& requirement : requirements) {
    if (!requirement.is_object()) continue;
    for (const auto& [name, scopes] : requirement.items()) {
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        names.push_back(name);
      }
    }
  }
  return names;
}

std::string resolve_base_url(const Json& doc, const ParseOptions& options) {
  std::string url = options.server_url_override;
  if (url.empty()) {
    auto servers = doc.find("servers");
    if (servers != doc.end() && servers->is_array() && !servers->empty()) {
      const Json& server = servers->front();
      url = string_field(server, "url");
      if (auto vars = server.find("variables"); vars != server.end() && vars->is_object()) {
        for (const auto& [name, var] : vars->items()) {
          std::string placeholder = "{" + name + "}";
          std::string value = string_field(var, "default");
          for (std::size_t pos; (pos = url.find(placeholder)) != std::string::npos;) {
            url.replace(pos, placeholder.size(), value);
          }
        }
      }
    } else {
      url = "http://localhost";
    }
  }
  while (url.size() > 1 && url.back() == '/') url.pop_back();
  if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) {
    throw ValidationError("server url '" + url +
                          "' is not absolute; set server_url to the service address");
  }
  return url;
}

void check_version(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("document root must be a mapping");
  if (doc.contains("swagger")) {
    throw UnsupportedVersion(
        "Swagger " + string_field(doc, "swagger") +
        " documents are not supported; convert the document to OpenAPI 3.0 "
        "first (for example with the public Swagger Converter)");
  }
  auto it = doc.find("openapi");
  if (it == doc.end()) {
    throw UnsupportedVersion(
        "document has no 'openapi' version field; an OpenAPI 3.0 document is required");
  }
  std::string version = it->is_string() ? it->get<std::string>() : it->dump();
  int major = 0;
  try {
    major = std::stoi(version);
  } catch (const std::exception&) {
    throw UnsupportedVersion("unrecognized openapi version '" + version + "'");
  }
  if (major != 3) {
    throw UnsupportedVersion("openapi version " + version +
                             " is not supported; convert the document to OpenAPI 3.0");
  }
}

// --- serialization --------------------------------------------------------------

Json schema_to_json(const SchemaNode& schema) {
  Json out = Json::object();
  out["type"] = std::string(to_string(schema.kind));
  if (schema.format) out["format"] = *schema.format;
  if (schema.enum_values) out["enum"] = Json(*schema.enum_values);
  if (schema.example) out["example"] = *schema.example;
  const auto& c = schema.constraints;
  if (c.minimum) out["minimum"] = *c.minimum;
  if (c.maximum) out["maximum"] = *c.maximum;
  if (c.min_length) out["minLength"] = *c.min_length;
  if (c.max_length) out["maxLength"] = *c.max_length;
  if (c.pattern) out["pattern"] = *c.pattern;
  if (schema.kind == SchemaKind::Object) {
    Json props = Json::object();
    for (const auto& [name, child] : schema.properties) props[name] = schema_to_json(child);
    out["properties"] = std::move(props);
    if (!schema.required.empty()) out["required"] = schema.required;
  }
  if (schema.kind == SchemaKind::Array && schema.items) {
    out["items"] = schema_to_json(*schema.items);
  }
  return out;
}

void flatten_into(const SchemaNode& node, const std::string& prefix, int depth,
                  int max_depth,
                  std::vector<std::pair<std::string, const SchemaNode*>>& out) {
  for (const auto& [name, child] : node.properties) {
    std::string path = prefix.empty() ? name : prefix + "." + name;
    const SchemaNode* target = &child;
    if (child.kind == SchemaKind::Array && child.items &&
        child.items->kind == SchemaKind::Object) {
      target = child.items.get();
    }
    if (target->kind == SchemaKind::Object && !target->properties.empty() &&
        depth < max_depth) {
      flatten_into(*target, path, depth + 1, max_depth, out);
    } else {
      out.emplace_back(path, &child);
    }
  }
}

}  // namespace

// --- enums ------------------------------------------------------------------------

std::string_view to_string(HttpMethod method) {
  switch (method) {
    case HttpMethod::Get: return "GET";
    case HttpMethod::Post: return "POST";
    case HttpMethod::Put: return "PUT";
    case HttpMethod::Delete: return "DELETE";
    case HttpMethod::Patch: return "PATCH";
    case HttpMethod::Head: return "HEAD";
    case HttpMethod::Options: return "OPTIONS";
  }
  return "GET";
}

std::string_view to_lower_string(HttpMethod method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "get";
}

std::optional<HttpMethod> parse_http_method(std::string_view text) {
  std::string key = lower(text);
  for (const auto& [m, name] : kMethodNames) {
    if (name == key) return m;
  }
  return std::nullopt;
}

std::string_view to_string(SchemaKind kind) {
  switch (kind) {
    case SchemaKind::String: return "string";
    case SchemaKind::Number: return "number";
    case SchemaKind::Integer: return "integer";
    case SchemaKind::Boolean: return "boolean";
    case SchemaKind::Array: return "array";
    case SchemaKind::Object: return "object";
    case SchemaKind::Null: return "null";
  }
  return "null";
}

std::optional<SchemaKind> parse_schema_kind(std::string_view text) {
  for (auto kind : {SchemaKind::String, SchemaKind::Number, SchemaKind::Integer,
                    SchemaKind::Boolean, SchemaKind::Array, SchemaKind::Object,
                    SchemaKind::Null}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(ParamLocation location) {
  switch (location) {
    case ParamLocation::Path: return "path";
    case ParamLocation::Query: return "query";
    case ParamLocation::Header: return "header";
    case ParamLocation::Cookie: return "cookie";
  }
  return "query";
}

// --- model accessors -------------------------------------------------------------

const SchemaNode* SchemaNode::property(std::string_view name) const {
  for (const auto& [key, child] : properties) {
    if (key == name) return &child;
  }
  return nullptr;
}

bool SchemaNode::is_required(std::string_view name) const {
  return std::find(required.begin(), required.end(), name) != required.end();
}

bool operator==(const SchemaNode& a, const SchemaNode& b) {
  if (a.kind != b.kind || a.enum_values != b.enum_values || a.example != b.example ||
      a.format != b.format || a.required != b.required ||
      a.constraints != b.constraints || a.properties != b.properties) {
    return false;
  }
  if (static_cast<bool>(a.items) != static_cast<bool>(b.items)) return false;
  return !a.items || *a.items == *b.items;
}

const MediaSchema& BodySchema::preferred() const {
  for (const auto& m : media) {
    if (m.media_type == "application/json") return m;
  }
  return media.front();
}

const ParameterSpec* OperationSpec::parameter(
    std::string_view name, std::optional<ParamLocation> location) const {
  for (const auto& p : parameters) {
    if (p.name == name && (!location || p.location == *location)) return &p;
  }
  return nullptr;
}

const OperationSpec* ApiModel::find(std::string_view operation_id) const {
  for (const auto& op : operations) {
    if (op.id == operation_id) return &op;
  }
  return nullptr;
}

bool is_success_status_pattern(std::string_view pattern) {
  if (pattern.size() != 3 || pattern[0] != '2') return false;
  std::string rest = lower(pattern.substr(1));
  if (rest == "xx") return true;
  return std::isdigit(static_cast<unsigned char>(rest[0])) &&
         std::isdigit(static_cast<unsigned char>(rest[1]));
}

// --- parsing ----------------------------------------------------------------------

Json load_document(std::string_view document, DocumentFormat format) {
  if (format == DocumentFormat::Auto) {
    format = looks_like_json(document) ? DocumentFormat::Json : DocumentFormat::Yaml;
  }
  if (format == DocumentFormat::Json) {
    try {
      return Json::parse(document.begin(), document.end());
    } catch (const Json::parse_error& e) {
      auto [line, column] = line_column(document, e.byte > 0 ? e.byte - 1 : 0);
      throw ParseError(std::string("malformed JSON: ") + e.what(), line, column);
    }
  }
  try {
    return yaml_to_json(YAML::Load(std::string(document)));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed YAML: " + e.msg,
                     static_cast<std::size_t>(e.mark.line + 1),
                     static_cast<std::size_t>(e.mark.column + 1));
  }
}

ApiModel parse_spec(std::string_view document, const ParseOptions& options) {
  const Json doc = load_document(document, options.format);
  check_version(doc);
  Resolver resolver(doc, options.max_ref_depth);

  ApiModel model;
  if (auto info = doc.find("info"); info != doc.end() && info->is_object()) {
    model.title = string_field(*info, "title");
    model.version = string_field(*info, "version");
  }
  model.base_url = resolve_base_url(doc, options);

  if (auto components = doc.find("components");
      components != doc.end() && components->is_object()) {
    if (auto schemes = components->find("securitySchemes");
        schemes != components->end() && schemes->is_object()) {
      for (const auto& [name, raw] : schemes->items()) {
        const Json& node = resolver.deref(raw);
        model.security_schemes[name] = SecurityScheme{
            .type = string_field(node, "type"),
            .scheme = lower(string_field(node, "scheme")),
            .in = string_field(node, "in"),
            .name = string_field(node, "name"),
        };
      }
    }
  }

  std::vector<std::string> global_security;
  if (auto sec = doc.find("security"); sec != doc.end()) {
    global_security = security_names(*sec);
  }

  std::set<std::string> ids;
  auto paths = doc.find("paths");
  if (paths != doc.end() && paths->is_object()) {
    for (const auto& [path, raw_item] : paths->items()) {
      const Json& item = resolver.deref(raw_item);
      if (!item.is_object()) continue;
      std::vector<ParameterSpec> shared;
      if (auto params = item.find("parameters"); params != item.end() && params->is_array()) {
        for (const auto& p : *params) shared.push_back(convert_parameter(resolver, p, path));
      }
      for (const auto& [key, raw_op] : item.items()) {
        auto method = parse_http_method(key);
        if (!method || key != lower(key) || key == "trace") continue;
        const Json& node = resolver.deref(raw_op);
        OperationSpec op;
        op.method = *method;
        op.path = path;
        op.id = string_field(node, "operationId");
        if (op.id.empty()) op.id = std::string(to_lower_string(*method)) + ":" + path;
        std::string where = op.id;

        op.parameters = shared;
        if (auto params = node.find("parameters"); params != node.end() && params->is_array()) {
          for (const auto& p : *params) {
            ParameterSpec param = convert_parameter(resolver, p, where);
            auto existing = std::find_if(
                op.parameters.begin(), op.parameters.end(), [&](const ParameterSpec& q) {
                  return q.name == param.name && q.location == param.location;
                });
            if (existing != op.parameters.end()) {
              *existing = std::move(param);
            } else {
              op.parameters.push_back(std::move(param));
            }
          }
        }
        for (const auto& name : template_names(path)) {
          if (!op.parameter(name, ParamLocation::Path)) {
            throw ValidationError(where + ": path template segment {" + name +
                                  "} has no matching path parameter");
          }
        }

        if (auto body = node.find("requestBody"); body != node.end()) {
          const Json& b = resolver.deref(*body);
          BodySchema schema;
          schema.required = b.value("required", false);
          if (auto content = b.find("content"); content != b.end() && content->is_object()) {
            for (const auto& [media_type, media] : content->items()) {
              schema.media.push_back(MediaSchema{
                  .media_type = media_type,
                  .schema = media.contains("schema")
                                ? resolver.schema(media["schema"])
                                : schema_of(SchemaKind::String),
              });
            }
          }
          if (!schema.media.empty()) op.request_body = std::move(schema);
        }

        if (auto responses = node.find("responses");
            responses != node.end() && responses->is_object()) {
          for (const auto& [status, raw_response] : responses->items()) {
            const Json& r = resolver.deref(raw_response);
            ResponseSchema response;
            response.description = string_field(r, "description");
            if (auto content = r.find("content"); content != r.end()) {
              std::string media_type;
              if (const Json* media = preferred_media(*content, &media_type);
                  media && media->contains("schema")) {
                response.content = MediaSchema{
                    .media_type = media_type,
                    .schema = resolver.schema((*media)["schema"]),
                };
              }
            }
            op.responses.emplace_back(status, std::move(response));
          }
        }

        op.security = node.contains("security") ? security_names(node["security"])
                                                : global_security;
        if (!ids.insert(op.id).second) {
          throw ValidationError("duplicate operation id '" + op.id + "'");
        }
        model.operations.push_back(std::move(op));
      }
    }
  }
  return model;
}

Json serialize_model(const ApiModel& model) {
  Json doc = Json::object();
  doc["openapi"] = "3.0.3";
  doc["info"] = {{"title", model.title}, {"version", model.version}};
  doc["servers"] = Json::array({Json{{"url", model.base_url}}});
  Json paths = Json::object();
  for (const auto& op : model.operations) {
    Json node = Json::object();
    node["operationId"] = op.id;
    Json params = Json::array();
    for (const auto& p : op.parameters) {
      params.push_back({{"name", p.name},
                        {"in", std::string(to_string(p.location))},
                        {"required", p.required},
                        {"schema", schema_to_json(p.schema)}});
    }
    node["parameters"] = std::move(params);
    if (op.request_body) {
      Json content = Json::object();
      for (const auto& m : op.request_body->media) {
        content[m.media_type] = {{"schema", schema_to_json(m.schema)}};
      }
      node["requestBody"] = {{"required", op.request_body->required},
                             {"content", std::move(content)}};
    }
    Json responses = Json::object();
    for (const auto& [status, response] : op.responses) {
      Json r = {{"description", response.description}};
      if (response.content) {
        r["content"] = {{response.content->media_type,
                         {{"schema", schema_to_json(response.content->schema)}}}};
      }
      responses[status] = std::move(r);
    }
    node["responses"] = std::move(responses);
    Json security = Json::array();
    for (const auto& name : op.security) security.push_back({{name, Json::array()}});
    node["security"] = std::move(security);
    paths[op.path][std::string(to_lower_string(op.method))] = std::move(node);
  }
  doc["paths"] = std::move(paths);
  Json schemes = Json::object();
  for (const auto& [name, s] : model.security_schemes) {
    Json node = {{"type", s.type}};
    if (!s.scheme.empty()) node["scheme"] = s.scheme;
    if (!s.in.empty()) node["in"] = s.in;
    if (!s.name.empty()) node["name"] = s.name;
    schemes[name] = std::move(node);
  }
  doc["components"] = {{"securitySchemes", std::move(schemes)}};
  return doc;
}

std::vector<std::pair<std::string, const SchemaNode*>> flatten_schema(
    const SchemaNode& schema, int max_depth) {
  std::vector<std::pair<std::string, const SchemaNode*>> out;
  const SchemaNode* root = &schema;
  if (root->kind == SchemaKind::Array && root->items) root = root->items.get();
  if (root->kind == SchemaKind::Object) flatten_into(*root, "", 1, max_depth, out);
  return out;
}

IoFields list_io_fields(const OperationSpec& op) {
  IoFields fields;
  for (const auto& p : op.parameters) {
    fields.inputs.push_back(IoField{
        .path = p.name, .origin = FieldOrigin::Parameter, .location = p.location,
        .schema = p.schema});
  }
  if (op.request_body) {
    for (const auto& [path, schema] : flatten_schema(op.request_body->preferred().schema)) {
      // A body property shadowed by a parameter name keeps a distinct path.
      bool clash = op.parameter(path) != nullptr;
      fields.inputs.push_back(IoField{.path = clash ? "body." + path : path,
                                      .origin = FieldOrigin::Body,
                                      .location = std::nullopt, .schema = *schema});
    }
  }
  std::set<std::string> seen;
  for (const auto& [status, response] : op.responses) {
    if (!is_success_status_pattern(status) || !response.content) continue;
    for (const auto& [path, schema] : flatten_schema(response.content->schema)) {
      if (!seen.insert(path).second) continue;
      fields.outputs.push_back(IoField{.path = path, .origin = FieldOrigin::Response,
                                       .location = std::nullopt, .schema = *schema});
    }
  }
  return fields;
}

}  // namespace resttest
