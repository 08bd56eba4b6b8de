#pragma once

// Random small API models over the 10-token test vocabulary, and an
// all-pairs reference implementation of dependency-graph construction.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "resttest/embedding.hpp"
#include "resttest/oasmodel.hpp"
#include "resttest/spdg.hpp"

namespace resttest::testing {

inline const std::vector<std::string>& tiny_vocabulary() {
  static const std::vector<std::string> kWords = {"id",   "user", "name",  "email", "order",
                                                  "item", "price", "count", "code",  "date"};
  return kWords;
}

inline std::string random_field_name(std::mt19937_64& rng) {
  const auto& words = tiny_vocabulary();
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> parts(1, 2);
  std::bernoulli_distribution oov(0.1);
  std::string name;
  int n = parts(rng);
  for (int i = 0; i < n; ++i) {
    std::string w = oov(rng) ? "zorp" : words[pick(rng)];
    if (i > 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    name += w;
  }
  return name;
}

// Up to `max_ops` operations with up to `max_fields` input and output fields.
inline ApiModel random_model(std::mt19937_64& rng, int max_ops = 10, int max_fields = 6) {
  std::uniform_int_distribution<int> op_count(2, max_ops);
  std::uniform_int_distribution<int> field_count(0, max_fields);
  ApiModel model;
  model.title = "random";
  model.base_url = "http://localhost";
  int ops = op_count(rng);
  for (int i = 0; i < ops; ++i) {
    OperationSpec op;
    op.id = "op" + std::to_string(i);
    op.method = HttpMethod::Post;
    op.path = "/r" + std::to_string(i);
    std::set<std::string> seen;
    int inputs = field_count(rng);
    for (int k = 0; k < inputs; ++k) {
      std::string name = random_field_name(rng);
      if (!seen.insert(name).second) continue;
      ParameterSpec p;
      p.name = name;
      p.location = ParamLocation::Query;
      p.schema.kind = SchemaKind::String;
      op.parameters.push_back(p);
    }
    SchemaNode out;
    out.kind = SchemaKind::Object;
    seen.clear();
    int outputs = field_count(rng);
    for (int k = 0; k < outputs; ++k) {
      std::string name = random_field_name(rng);
      if (!seen.insert(name).second) continue;
      SchemaNode leaf;
      leaf.kind = SchemaKind::String;
      out.properties.emplace_back(name, leaf);
    }
    ResponseSchema response;
    response.description = "ok";
    response.content = MediaSchema{"application/json", out};
    op.responses.emplace_back("200", response);
    model.operations.push_back(std::move(op));
  }
  return model;
}

struct OracleEdge {
  std::string producer_op, producer_field, consumer_op, consumer_field;
  double similarity = 0.0;
  bool is_fallback = false;
};

inline std::optional<std::vector<double>> oracle_vector(const std::string& name,
                                                        const EmbeddingTable& table) {
  std::vector<double> sum(table.dimension(), 0.0);
  int known = 0;
  for (const auto& token : tokenize_identifier(name)) {
    const Vector* v = table.find(token);
    if (!v) continue;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++known;
  }
  if (known == 0) return std::nullopt;
  double norm = 0.0;
  for (auto& x : sum) {
    x /= known;
    norm += x * x;
  }
  if (norm == 0.0) return std::nullopt;
  return sum;
}

inline double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Every (producer output, consumer input) pair across distinct operations
// is scored; consumers without a pair at or above the threshold get their
// k best pairs as fallbacks.
inline std::vector<OracleEdge> oracle_edges(const ApiModel& model, const EmbeddingTable& table,
                                            double threshold, int k) {
  std::vector<OracleEdge> edges;
  for (const auto& consumer : model.operations) {
    std::vector<OracleEdge> above, below;
    for (const auto& producer : model.operations) {
      if (producer.id == consumer.id) continue;
      for (const auto& out : list_io_fields(producer).outputs) {
        auto vo = oracle_vector(out.path, table);
        if (!vo) continue;
        for (const auto& in : list_io_fields(consumer).inputs) {
          auto vi = oracle_vector(in.path, table);
          if (!vi) continue;
          OracleEdge e{producer.id, out.path, consumer.id, in.path, oracle_cosine(*vo, *vi),
                       false};
          (e.similarity >= threshold ? above : below).push_back(e);
        }
      }
    }
    if (!above.empty()) {
      edges.insert(edges.end(), above.begin(), above.end());
      continue;
    }
    std::sort(below.begin(), below.end(), [](const OracleEdge& a, const OracleEdge& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return std::tie(a.producer_op, a.producer_field, a.consumer_field) <
             std::tie(b.producer_op, b.producer_field, b.consumer_field);
    });
    for (int i = 0; i < k && i < static_cast<int>(below.size()); ++i) {
      below[i].is_fallback = true;
      edges.push_back(below[i]);
    }
  }
  return edges;
}

// Empty when the graph matches the oracle; otherwise a description of the
// first difference.
inline std::string compare_with_oracle(const Spdg& graph, const std::vector<OracleEdge>& oracle) {
  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, std::pair<double, bool>> expected, actual;
  for (const auto& e : oracle) {
    expected[{e.producer_op, e.producer_field, e.consumer_op, e.consumer_field}] = {
        e.similarity, e.is_fallback};
  }
  for (const auto& e : graph.edges) {
    actual[{e.producer_op, e.producer_field, e.consumer_op, e.consumer_field}] = {
        e.similarity, e.is_fallback};
  }
  if (actual.size() != graph.edges.size()) return "duplicate edges in graph";
  for (const auto& [key, value] : expected) {
    auto it = actual.find(key);
    std::string name = std::get<0>(key) + "#" + std::get<1>(key) + "->" + std::get<2>(key) +
                       "#" + std::get<3>(key);
    if (it == actual.end()) return "missing edge " + name;
    if (std::abs(it->second.first - value.first) > 1e-9) return "similarity differs on " + name;
    if (it->second.second != value.second) return "fallback flag differs on " + name;
  }
  for (const auto& [key, value] : actual) {
    if (!expected.count(key)) {
      return "unexpected edge " + std::get<0>(key) + "#" + std::get<1>(key) + "->" +
             std::get<2>(key) + "#" + std::get<3>(key);
    }
  }
  return {};
}

}  // namespace resttest::testing
