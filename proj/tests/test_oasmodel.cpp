#include <gtest/gtest.h>

#include "resttest/errors.hpp"
#include "resttest/oasmodel.hpp"
#include "test_helpers.hpp"

namespace resttest {
namespace {

ParseOptions json_options() {
  ParseOptions options;
  options.format = DocumentFormat::Json;
  return options;
}

std::vector<std::string> paths(const std::vector<IoField>& fields) {
  std::vector<std::string> out;
  for (const auto& f : fields) out.push_back(f.path);
  return out;
}

constexpr const char* kPing = R"(
openapi: 3.0.0
info: {title: Ping, version: "1"}
servers: [{url: "http://localhost:1234"}]
paths:
  /ping:
    get:
      responses:
        "200": {description: ok}
)";

TEST(ParseSpec, MinimalDocumentSynthesizesOperationId) {
  ApiModel model = parse_spec(kPing);
  ASSERT_EQ(model.operations.size(), 1u);
  EXPECT_EQ(model.operations[0].id, "get:/ping");
  EXPECT_EQ(model.operations[0].method, HttpMethod::Get);
  EXPECT_EQ(model.base_url, "http://localhost:1234");
  EXPECT_EQ(model.title, "Ping");
}

TEST(ParseSpec, JsonInputIsAccepted) {
  std::string doc = R"({"openapi":"3.0.1","info":{"title":"J","version":"1"},
    "servers":[{"url":"http://h:1"}],
    "paths":{"/a":{"post":{"operationId":"makeA","responses":{"201":{"description":"x"}}}}}})";
  ApiModel model = parse_spec(doc, json_options());
  ASSERT_EQ(model.operations.size(), 1u);
  EXPECT_EQ(model.operations[0].id, "makeA");
}

TEST(ParseSpec, SwaggerTwoIsRejected) {
  const char* doc = R"(
swagger: "2.0"
info: {title: Old, version: "1"}
paths: {}
)";
  EXPECT_THROW(parse_spec(doc), UnsupportedVersion);
}

TEST(ParseSpec, MalformedDocumentReportsPosition) {
  try {
    parse_spec("openapi: 3.0.0\npaths: [unclosed\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 1u);
  }
}

TEST(ParseSpec, MissingRefIsNamed) {
  const char* doc = R"(
openapi: 3.0.0
info: {title: R, version: "1"}
servers: [{url: "http://h"}]
paths:
  /x:
    get:
      responses:
        "200":
          description: ok
          content:
            application/json:
              schema: {$ref: "#/components/schemas/Nope"}
)";
  try {
    parse_spec(doc);
    FAIL() << "expected UnresolvedRef";
  } catch (const UnresolvedRef& e) {
    EXPECT_EQ(e.pointer(), "#/components/schemas/Nope");
  }
}

TEST(ParseSpec, PathTemplateWithoutParameterIsInvalid) {
  const char* doc = R"(
openapi: 3.0.0
info: {title: V, version: "1"}
servers: [{url: "http://h"}]
paths:
  /items/{id}:
    get:
      responses:
        "200": {description: ok}
)";
  EXPECT_THROW(parse_spec(doc), ValidationError);
}

TEST(ParseSpec, CyclicRefIsTruncated) {
  const char* doc = R"(
openapi: 3.0.0
info: {title: C, version: "1"}
servers: [{url: "http://h"}]
paths:
  /nodes:
    get:
      responses:
        "200":
          description: ok
          content:
            application/json:
              schema: {$ref: "#/components/schemas/Node"}
components:
  schemas:
    Node:
      type: object
      properties:
        name: {type: string}
        child: {$ref: "#/components/schemas/Node"}
)";
  ApiModel model = parse_spec(doc);
  const SchemaNode* schema = &model.operations[0].responses[0].second.content->schema;
  int depth = 0;
  while (schema && schema->kind == SchemaKind::Object) {
    schema = schema->property("child");
    ++depth;
  }
  ASSERT_NE(schema, nullptr);
  EXPECT_EQ(schema->kind, SchemaKind::Null);
  EXPECT_LE(depth, 5);
}

TEST(ParseSpec, MarketSandboxHasThirteenOperations) {
  std::string text = testing::read_text(testing::source_path("sandbox/specs/market.yaml"));
  ApiModel model = parse_spec(text);
  EXPECT_EQ(model.operations.size(), 13u);
  EXPECT_EQ(model.title, "Api Documentation");
  std::size_t secured = 0;
  for (const auto& op : model.operations) secured += op.security.empty() ? 0 : 1;
  EXPECT_EQ(secured, 10u);
}

TEST(ParseSpec, RoundTripThroughSerialization) {
  for (const char* spec : {"sandbox/specs/market.yaml", "sandbox/specs/chain3.yaml"}) {
    ApiModel model = parse_spec(testing::read_text(testing::source_path(spec)));
    ApiModel again = parse_spec(serialize_model(model).dump(), json_options());
    EXPECT_EQ(model, again) << spec;
  }
}

TEST(ListIoFields, FlattensParametersAndBody) {
  const char* doc = R"(
openapi: 3.0.0
info: {title: F, version: "1"}
servers: [{url: "http://h"}]
paths:
  /users:
    post:
      parameters:
        - {name: userId, in: query, schema: {type: string}}
      requestBody:
        content:
          application/json:
            schema:
              type: object
              properties:
                name: {type: string}
                address:
                  type: object
                  properties:
                    city: {type: string}
      responses:
        "400": {description: bad}
)";
  ApiModel model = parse_spec(doc);
  IoFields io = list_io_fields(model.operations[0]);
  EXPECT_EQ(paths(io.inputs), (std::vector<std::string>{"userId", "name", "address.city"}));
  EXPECT_TRUE(io.outputs.empty());
}

TEST(ListIoFields, ArrayOfObjectsInResponse) {
  const char* doc = R"(
openapi: 3.0.0
info: {title: F, version: "1"}
servers: [{url: "http://h"}]
paths:
  /orders:
    get:
      responses:
        "200":
          description: ok
          content:
            application/json:
              schema:
                type: object
                properties:
                  id: {type: integer}
                  items:
                    type: array
                    items:
                      type: object
                      properties:
                        productId: {type: string}
)";
  ApiModel model = parse_spec(doc);
  IoFields io = list_io_fields(model.operations[0]);
  EXPECT_EQ(paths(io.outputs), (std::vector<std::string>{"id", "items.productId"}));
}

TEST(ListIoFields, MarketOutputsMatchHandFlattening) {
  ApiModel model =
      parse_spec(testing::read_text(testing::source_path("sandbox/specs/market.yaml")));
  const OperationSpec* cart = model.find("addItemUsingPUT");
  ASSERT_NE(cart, nullptr);
  IoFields io = list_io_fields(*cart);
  EXPECT_EQ(paths(io.inputs), (std::vector<std::string>{"cartId", "productId", "quantity"}));
  EXPECT_EQ(paths(io.outputs), (std::vector<std::string>{"cartId", "customerId",
                                                         "items.productId", "items.quantity"}));
  const OperationSpec* delivery = model.find("setDeliveryUsingPUT");
  ASSERT_NE(delivery, nullptr);
  EXPECT_EQ(paths(list_io_fields(*delivery).inputs),
            (std::vector<std::string>{"orderId", "address.street", "address.city", "method"}));
}

TEST(ListIoFields, DeterministicAcrossCalls) {
  ApiModel model =
      parse_spec(testing::read_text(testing::source_path("sandbox/specs/market.yaml")));
  for (const auto& op : model.operations) {
    IoFields a = list_io_fields(op);
    IoFields b = list_io_fields(op);
    EXPECT_EQ(paths(a.inputs), paths(b.inputs));
    EXPECT_EQ(paths(a.outputs), paths(b.outputs));
  }
}

TEST(FlattenSchema, DepthCapTurnsDeepObjectsIntoLeaves) {
  SchemaNode leaf;
  leaf.kind = SchemaKind::String;
  SchemaNode level = leaf;
  for (int i = 0; i < 5; ++i) {
    SchemaNode parent;
    parent.kind = SchemaKind::Object;
    parent.properties.emplace_back("n" + std::to_string(i), level);
    level = parent;
  }
  auto flat = flatten_schema(level);
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_EQ(flat[0].first, "n4.n3.n2");
}

TEST(BodySchema, PrefersJson) {
  BodySchema body;
  body.media.push_back({"text/plain", {}});
  body.media.push_back({"application/json", {}});
  EXPECT_EQ(body.preferred().media_type, "application/json");
  body.media.pop_back();
  EXPECT_EQ(body.preferred().media_type, "text/plain");
}

}  // namespace
}  // namespace resttest
