#include <gtest/gtest.h>

#include <map>
#include <set>

#include "resttest/errors.hpp"
#include "resttest/planner.hpp"
#include "resttest/stub_llm.hpp"
#include "resttest/valuesources.hpp"

namespace resttest {
namespace {

SchemaNode scalar(SchemaKind kind) {
  SchemaNode s;
  s.kind = kind;
  return s;
}

TEST(DefaultValue, ExampleWins) {
  SchemaNode s = scalar(SchemaKind::String);
  s.example = Json("Atlanta");
  s.enum_values = std::vector<Json>{"x"};
  Rng rng(1);
  EXPECT_EQ(default_value(s, rng), Json("Atlanta"));
}

TEST(DefaultValue, EnumDrawsAreBalanced) {
  SchemaNode s = scalar(SchemaKind::String);
  s.enum_values = std::vector<Json>{"red", "blue"};
  Rng rng(42);
  int red = 0;
  for (int i = 0; i < 10000; ++i) {
    Json v = default_value(s, rng);
    ASSERT_TRUE(v == "red" || v == "blue");
    red += v == "red" ? 1 : 0;
  }
  EXPECT_NEAR(red / 10000.0, 0.5, 0.03);
}

TEST(DefaultValue, DegenerateRange) {
  SchemaNode s = scalar(SchemaKind::Integer);
  s.constraints.minimum = 5;
  s.constraints.maximum = 5;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(default_value(s, rng), Json(5));
}

TEST(DefaultValue, TypeBasedValues) {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    Json str = default_value(scalar(SchemaKind::String), rng);
    ASSERT_TRUE(str.is_string());
    std::string text = str.get<std::string>();
    EXPECT_GE(text.size(), 1u);
    EXPECT_LE(text.size(), 12u);
    for (char c : text) EXPECT_TRUE(c >= 'a' && c <= 'z');
    Json n = default_value(scalar(SchemaKind::Integer), rng);
    ASSERT_TRUE(n.is_number_integer());
    EXPECT_GE(n.get<long long>(), 0);
    EXPECT_LE(n.get<long long>(), 100);
    EXPECT_TRUE(default_value(scalar(SchemaKind::Boolean), rng).is_boolean());
  }
  SchemaNode arr = scalar(SchemaKind::Array);
  arr.items = std::make_shared<SchemaNode>(scalar(SchemaKind::Integer));
  Json a = default_value(arr, rng);
  ASSERT_TRUE(a.is_array());
  EXPECT_GE(a.size(), 1u);
  EXPECT_LE(a.size(), 3u);
}

TEST(DefaultValue, ObjectRequiredAlwaysPresent) {
  SchemaNode obj = scalar(SchemaKind::Object);
  obj.properties.emplace_back("need", scalar(SchemaKind::String));
  obj.properties.emplace_back("maybe", scalar(SchemaKind::Boolean));
  obj.required = {"need"};
  Rng rng(4);
  int optional_seen = 0;
  for (int i = 0; i < 400; ++i) {
    Json v = default_value(obj, rng);
    ASSERT_TRUE(v.contains("need"));
    optional_seen += v.contains("maybe") ? 1 : 0;
  }
  EXPECT_NEAR(optional_seen / 400.0, 0.5, 0.1);
}

SchemaNode random_schema(std::mt19937_64& gen, int depth) {
  std::uniform_int_distribution<int> kind_pick(0, depth > 0 ? 5 : 3);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> bound(-50, 150);
  SchemaNode s;
  switch (kind_pick(gen)) {
    case 0:
      s.kind = SchemaKind::String;
      if (coin(gen)) {
        s.enum_values = std::vector<Json>{"a", "bb", "ccc"};
      } else if (coin(gen)) {
        s.constraints.min_length = 2;
        s.constraints.max_length = 6;
      }
      break;
    case 1:
    case 2: {
      s.kind = coin(gen) ? SchemaKind::Integer : SchemaKind::Number;
      double lo = bound(gen), hi = lo + std::abs(bound(gen));
      if (coin(gen)) s.constraints.minimum = std::ceil(lo);
      if (coin(gen)) s.constraints.maximum = std::floor(hi) + 1;
      break;
    }
    case 3:
      s.kind = SchemaKind::Boolean;
      break;
    case 4:
      s.kind = SchemaKind::Array;
      s.items = std::make_shared<SchemaNode>(random_schema(gen, depth - 1));
      break;
    default:
      s.kind = SchemaKind::Object;
      for (int i = 0; i < 3; ++i) {
        std::string name = "f" + std::to_string(i);
        s.properties.emplace_back(name, random_schema(gen, depth - 1));
        if (coin(gen)) s.required.push_back(name);
      }
  }
  return s;
}

TEST(DefaultValue, AlwaysConformsToRandomSchemas) {
  std::mt19937_64 gen(31);
  Rng rng(32);
  for (int trial = 0; trial < 2000; ++trial) {
    SchemaNode s = random_schema(gen, 2);
    Json v = default_value(s, rng);
    EXPECT_TRUE(conforms(v, s)) << v.dump();
  }
}

TEST(Conforms, RejectsWrongShapes) {
  SchemaNode i = scalar(SchemaKind::Integer);
  i.constraints.maximum = 10;
  EXPECT_TRUE(conforms(Json(3), i));
  EXPECT_FALSE(conforms(Json(11), i));
  EXPECT_FALSE(conforms(Json("3"), i));
  EXPECT_FALSE(conforms(Json(2.5), i));
  SchemaNode e = scalar(SchemaKind::String);
  e.enum_values = std::vector<Json>{"x"};
  EXPECT_FALSE(conforms(Json("y"), e));
}

TEST(ResponseStoreTest, FifoCapacity) {
  ResponseStore store(3);
  for (int i = 0; i < 5; ++i) store.record("op", "id", Json(i));
  const auto& h = store.history("op", "id");
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h.front(), Json(2));
  EXPECT_EQ(h.back(), Json(4));
  EXPECT_TRUE(store.history("op", "other").empty());
  EXPECT_TRUE(ResponseStore().empty());
  EXPECT_EQ(ResponseStore().capacity(), 50u);
}

DependencyEdge edge_from(const std::string& op, const std::string& field) {
  DependencyEdge e;
  e.producer_op = op;
  e.producer_field = field;
  e.consumer_op = "c";
  e.consumer_field = field;
  return e;
}

TEST(DependencyValue, PicksFromHistory) {
  ResponseStore store;
  Rng rng(6);
  EXPECT_FALSE(dependency_value(edge_from("p", "id"), store, rng).has_value());
  store.record("p", "id", Json(17));
  EXPECT_EQ(dependency_value(edge_from("p", "id"), store, rng), Json(17));

  store.record("q", "id", Json("a"));
  store.record("q", "id", Json("b"));
  store.record("q", "id", Json("c"));
  std::map<std::string, int> counts;
  for (int i = 0; i < 9000; ++i) {
    ++counts[dependency_value(edge_from("q", "id"), store, rng)->get<std::string>()];
  }
  for (const auto& [v, n] : counts) EXPECT_NEAR(n / 9000.0, 1.0 / 3.0, 0.03) << v;
}

TEST(ExtractPath, TraversesArrays) {
  Json doc = Json::parse(R"({"id":1,"items":[{"productId":"a"},{"productId":"b"}]})");
  EXPECT_EQ(extract_path(doc, "id"), (std::vector<Json>{1}));
  EXPECT_EQ(extract_path(doc, "items.productId"), (std::vector<Json>{"a", "b"}));
  EXPECT_TRUE(extract_path(doc, "missing").empty());
  Json list = Json::parse(R"([{"productId":"x"}])");
  EXPECT_EQ(extract_path(list, "productId"), (std::vector<Json>{"x"}));
}

TEST(CoerceValue, Rules) {
  EXPECT_EQ(coerce_value(Json("42"), scalar(SchemaKind::Integer)), Json(42));
  EXPECT_EQ(coerce_value(Json(42), scalar(SchemaKind::String)), Json("42"));
  EXPECT_EQ(coerce_value(Json("2.5"), scalar(SchemaKind::Number)), Json(2.5));
  EXPECT_EQ(coerce_value(Json("true"), scalar(SchemaKind::Boolean)), Json(true));
  EXPECT_FALSE(coerce_value(Json("abc"), scalar(SchemaKind::Integer)).has_value());
  EXPECT_FALSE(coerce_value(Json::object(), scalar(SchemaKind::Integer)).has_value());
}

OperationSpec sample_operation() {
  OperationSpec op;
  op.id = "createUser";
  op.method = HttpMethod::Post;
  op.path = "/users";
  return op;
}

ValueRequest sample_request(const OperationSpec& op) {
  ValueRequest req;
  req.operation = &op;
  req.target_fields = {{"email", scalar(SchemaKind::String)},
                       {"age", scalar(SchemaKind::Integer)}};
  return req;
}

TEST(ParseLlmContent, DropsUnknownAndUncoercible) {
  OperationSpec op = sample_operation();
  ValueRequest req = sample_request(op);
  auto values = parse_llm_content(R"({"email":"a@b.c","age":"x","extra":1})", req);
  EXPECT_EQ(values.size(), 1u);
  EXPECT_EQ(values.at("email"), Json("a@b.c"));
  values = parse_llm_content("```json\n{\"age\": \"42\"}\n```", req);
  EXPECT_EQ(values.at("age"), Json(42));
  EXPECT_THROW(parse_llm_content("sure, here you go", req), MalformedLlmReply);
  EXPECT_THROW(parse_llm_content("[1,2]", req), MalformedLlmReply);
}

TEST(BuildLlmRequest, ShapeAndPrompt) {
  OperationSpec op = sample_operation();
  ValueRequest req = sample_request(op);
  LlmConfig cfg;
  cfg.model_name = "m";
  Json body = build_llm_request(req, cfg);
  EXPECT_EQ(body["model"], "m");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  std::string prompt = build_llm_prompt(req);
  EXPECT_NE(prompt.find("createUser"), std::string::npos);
  EXPECT_NE(prompt.find("Fields (JSON): "), std::string::npos);
}

TEST(LlmGenerate, AgainstStubServer) {
  StubLlmServer stub;
  LlmConfig cfg;
  cfg.base_url = stub.start();
  cfg.model_name = "stub";
  cfg.price_per_input_token = 1e-6;
  cfg.price_per_output_token = 2e-6;
  OperationSpec op = sample_operation();
  LlmResult result = llm_generate(sample_request(op), cfg);
  ASSERT_TRUE(result.values.count("email"));
  EXPECT_NE(result.values["email"].get<std::string>().find('@'), std::string::npos);
  EXPECT_TRUE(result.values["age"].is_number_integer());
  EXPECT_GT(result.usage.input_tokens, 0u);
  EXPECT_EQ(stub.calls(), 1u);
  // Same request, same reply.
  EXPECT_EQ(llm_generate(sample_request(op), cfg).values, result.values);
  stub.stop();
}

TEST(LlmGenerate, UnreachableEndpoint) {
  LlmConfig cfg;
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.timeout_seconds = 2;
  OperationSpec op = sample_operation();
  EXPECT_THROW(llm_generate(sample_request(op), cfg), LlmUnavailable);
}

TEST(LlmValueCache, FallsBackAndCachesFailures) {
  int calls = 0;
  std::vector<std::string> warnings;
  LlmValueCache cache(
      [&](const ValueRequest&) -> LlmResult {
        ++calls;
        throw LlmUnavailable("down");
      },
      LlmConfig{}, [&](const std::string& w) { warnings.push_back(w); });
  OperationSpec op = sample_operation();
  OperationAgentInfo info;
  info.value_fields.push_back(ValueField{"email", 0, "email", scalar(SchemaKind::String)});
  EXPECT_TRUE(cache.values_for(op, info).empty());
  EXPECT_TRUE(cache.values_for(op, info).empty());
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_TRUE(cache.contains("createUser"));
}

TEST(LlmValueCache, SaveAndLoad) {
  LlmValueCache cache(
      [](const ValueRequest& r) {
        LlmResult out;
        for (const auto& f : r.target_fields) out.values[f.path] = "v";
        out.usage = {10, 5};
        return out;
      },
      LlmConfig{});
  OperationSpec op = sample_operation();
  OperationAgentInfo info;
  info.value_fields.push_back(ValueField{"email", 0, "email", scalar(SchemaKind::String)});
  EXPECT_EQ(cache.values_for(op, info).at("email"), Json("v"));
  LlmValueCache other([](const ValueRequest&) -> LlmResult { throw LlmUnavailable("x"); },
                      LlmConfig{});
  other.load(cache.to_json());
  EXPECT_EQ(other.values_for(op, info).at("email"), Json("v"));
  EXPECT_EQ(other.calls(), 0u);
}

TEST(TrackCost, Arithmetic) {
  LlmConfig cfg;
  cfg.price_per_input_token = 1e-6;
  cfg.price_per_output_token = 2e-6;
  CostTracker tracker;
  EXPECT_EQ(track_cost(tracker, {0, 0}, cfg), 0.0);
  EXPECT_NEAR(track_cost(tracker, {1000, 500}, cfg), 0.002, 1e-15);
  EXPECT_NEAR(track_cost(tracker, {1000, 500}, cfg), 0.004, 1e-15);
  EXPECT_EQ(tracker.tokens().input_tokens, 2000u);
}

TEST(TrackCost, BuiltinPrices) {
  EXPECT_TRUE(builtin_price("gpt-4o").has_value());
  EXPECT_TRUE(builtin_price("gpt-4o-mini").has_value());
  EXPECT_TRUE(builtin_price("o1").has_value());
  EXPECT_TRUE(builtin_price("o1-mini").has_value());
  EXPECT_FALSE(builtin_price("stub").has_value());
  LlmConfig cfg;
  cfg.model_name = "stub";
  EXPECT_EQ(effective_price(cfg).input, 0.0);
}

TEST(StubValues, CannedChoices) {
  Json fields = Json::parse(R"([{"name":"email","type":"string"},
    {"name":"color","type":"string","enum":["red","blue"]},
    {"name":"address.city","type":"string"},
    {"name":"quantity","type":"integer"}])");
  Json values = stub_values(fields);
  EXPECT_NE(values["email"].get<std::string>().find('@'), std::string::npos);
  EXPECT_EQ(values["color"], "red");
  EXPECT_EQ(values["address.city"], "Atlanta");
  EXPECT_EQ(values["quantity"], 2);
}

}  // namespace
}  // namespace resttest
