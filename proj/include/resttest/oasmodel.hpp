#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resttest/json.hpp"

namespace resttest {

enum class HttpMethod { Get, Post, Put, Delete, Patch, Head, Options };

std::string_view to_string(HttpMethod method);           // "GET"
std::string_view to_lower_string(HttpMethod method);     // "get"
std::optional<HttpMethod> parse_http_method(std::string_view text);

enum class SchemaKind { String, Number, Integer, Boolean, Array, Object, Null };

std::string_view to_string(SchemaKind kind);
std::optional<SchemaKind> parse_schema_kind(std::string_view text);

struct SchemaConstraints {
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::optional<std::size_t> min_length;
  std::optional<std::size_t> max_length;
  std::optional<std::string> pattern;

  bool operator==(const SchemaConstraints&) const = default;
};

struct SchemaNode;
using SchemaProperty = std::pair<std::string, SchemaNode>;

// A resolved schema. Objects carry a (possibly empty) ordered property list;
// arrays always carry `items`.
struct SchemaNode {
  SchemaKind kind = SchemaKind::Null;
  std::optional<std::vector<Json>> enum_values;
  std::optional<Json> example;
  std::optional<std::string> format;
  std::vector<SchemaProperty> properties;
  std::vector<std::string> required;
  std::shared_ptr<const SchemaNode> items;
  SchemaConstraints constraints;

  const SchemaNode* property(std::string_view name) const;
  bool is_required(std::string_view name) const;

  friend bool operator==(const SchemaNode& a, const SchemaNode& b);
};

enum class ParamLocation { Path, Query, Header, Cookie };

std::string_view to_string(ParamLocation location);

struct ParameterSpec {
  std::string name;
  ParamLocation location = ParamLocation::Query;
  bool required = false;
  SchemaNode schema;

  bool operator==(const ParameterSpec&) const = default;
};

struct MediaSchema {
  std::string media_type;
  SchemaNode schema;

  bool operator==(const MediaSchema&) const = default;
};

struct BodySchema {
  bool required = false;
  std::vector<MediaSchema> media;  // document order

  // application/json if declared, else the first declared media type.
  const MediaSchema& preferred() const;

  bool operator==(const BodySchema&) const = default;
};

struct ResponseSchema {
  std::string description;
  std::optional<MediaSchema> content;  // preferred media type only

  bool operator==(const ResponseSchema&) const = default;
};

struct OperationSpec {
  std::string id;
  HttpMethod method = HttpMethod::Get;
  std::string path;
  std::vector<ParameterSpec> parameters;
  std::optional<BodySchema> request_body;
  std::vector<std::pair<std::string, ResponseSchema>> responses;  // status pattern
  std::vector<std::string> security;

  const ParameterSpec* parameter(std::string_view name,
                                 std::optional<ParamLocation> location = {}) const;

  bool operator==(const OperationSpec&) const = default;
};

struct SecurityScheme {
  std::string type;    // http, apiKey, oauth2, openIdConnect
  std::string scheme;  // bearer, basic (type http)
  std::string in;      // header, query, cookie (type apiKey)
  std::string name;    // header/query name (type apiKey)

  bool operator==(const SecurityScheme&) const = default;
};

struct ApiModel {
  std::string title;
  std::string version;
  std::string base_url;
  std::vector<OperationSpec> operations;
  std::map<std::string, SecurityScheme> security_schemes;

  const OperationSpec* find(std::string_view operation_id) const;

  bool operator==(const ApiModel&) const = default;
};

enum class DocumentFormat { Json, Yaml, Auto };

struct ParseOptions {
  DocumentFormat format = DocumentFormat::Auto;
  // Nesting allowance for a schema $ref that refers back into itself.
  int max_ref_depth = 3;
  // Replaces servers[0].url when non-empty.
  std::string server_url_override;
};

// Parses an OpenAPI 3.x document into a fully resolved model. Throws
// UnsupportedVersion, ParseError, UnresolvedRef or ValidationError.
ApiModel parse_spec(std::string_view document, const ParseOptions& options = {});

// Converts JSON/YAML text to a JSON tree without any OpenAPI interpretation.
Json load_document(std::string_view document, DocumentFormat format);

// Emits an OpenAPI 3.0 document (schemas inlined) that parses back to `model`.
Json serialize_model(const ApiModel& model);

// Maximum number of dotted segments produced when flattening nested schemas.
inline constexpr int kFlattenDepth = 3;

enum class FieldOrigin { Parameter, Body, Response };

struct IoField {
  std::string path;  // dotted for nested body/response properties
  FieldOrigin origin = FieldOrigin::Parameter;
  std::optional<ParamLocation> location;  // parameters only
  SchemaNode schema;
};

struct IoFields {
  std::vector<IoField> inputs;
  std::vector<IoField> outputs;
};

// Flattened input (parameters + request-body properties) and output (2xx
// response properties) fields of an operation, in document order.
IoFields list_io_fields(const OperationSpec& op);

// Flattened property paths of a schema (objects and arrays of objects are
// descended; the depth cap turns deeper objects into leaves).
std::vector<std::pair<std::string, const SchemaNode*>> flatten_schema(
    const SchemaNode& schema, int max_depth = kFlattenDepth);

bool is_success_status_pattern(std::string_view pattern);

}  // namespace resttest
