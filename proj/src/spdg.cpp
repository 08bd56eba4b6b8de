#include "resttest/spdg.hpp"

#include <algorithm>
#include <optional>
#include <tuple>

#include "resttest/errors.hpp"

namespace resttest {

namespace {

struct EmbeddedField {
  std::string path;
  std::optional<Vector> vector;
};

struct EmbeddedOperation {
  std::string id;
  std::vector<EmbeddedField> inputs;
  std::vector<EmbeddedField> outputs;
};

std::vector<EmbeddedField> embed(const std::vector<IoField>& fields,
                                 const EmbeddingTable& table) {
  std::vector<EmbeddedField> out;
  out.reserve(fields.size());
  for (const auto& f : fields) {
    NamedField named = make_named_field(f.path, table);
    if (named.vector &&
        std::all_of(named.vector->begin(), named.vector->end(),
                    [](double x) { return x == 0.0; })) {
      named.vector.reset();
    }
    out.push_back({f.path, std::move(named.vector)});
  }
  return out;
}

// Fallback ranking: higher similarity, then producer id, then field paths.
bool fallback_before(const DependencyEdge& a, const DependencyEdge& b) {
  return std::tie(b.similarity, a.producer_op, a.producer_field, a.consumer_field) <
         std::tie(a.similarity, b.producer_op, b.producer_field, b.consumer_field);
}

}  // namespace

std::string make_edge_id(std::string_view producer_op, std::string_view producer_field,
                         std::string_view consumer_op, std::string_view consumer_field) {
  std::string id;
  id.append(producer_op).append("#").append(producer_field);
  id.append("->");
  id.append(consumer_op).append("#").append(consumer_field);
  return id;
}

bool Spdg::has_node(std::string_view op) const {
  return std::find(nodes.begin(), nodes.end(), op) != nodes.end();
}

const DependencyEdge* Spdg::find_edge(std::string_view edge_id) const {
  for (const auto& e : edges) {
    if (e.id == edge_id) return &e;
  }
  return nullptr;
}

Spdg build_graph(const ApiModel& model, const EmbeddingTable& table, double threshold,
                 int fallback_k) {
  Spdg graph;
  graph.threshold = threshold;
  graph.fallback_k = fallback_k;

  std::vector<EmbeddedOperation> ops;
  ops.reserve(model.operations.size());
  for (const auto& op : model.operations) {
    IoFields io = list_io_fields(op);
    ops.push_back({op.id, embed(io.inputs, table), embed(io.outputs, table)});
    graph.nodes.push_back(op.id);
  }

  for (const auto& consumer : ops) {
    std::vector<DependencyEdge> above;
    std::vector<DependencyEdge> candidates;
    bool has_embedded_input = false;
    for (const auto& in : consumer.inputs) has_embedded_input |= in.vector.has_value();

    for (const auto& producer : ops) {
      if (producer.id == consumer.id) continue;
      for (const auto& out : producer.outputs) {
        if (!out.vector) continue;
        for (const auto& in : consumer.inputs) {
          if (!in.vector) continue;
          DependencyEdge edge;
          edge.producer_op = producer.id;
          edge.producer_field = out.path;
          edge.consumer_op = consumer.id;
          edge.consumer_field = in.path;
          edge.id = make_edge_id(producer.id, out.path, consumer.id, in.path);
          edge.similarity = similarity(*out.vector, *in.vector);
          if (edge.similarity >= threshold) {
            above.push_back(edge);
          } else {
            candidates.push_back(std::move(edge));
          }
        }
      }
    }

    if (!above.empty()) {
      graph.edges.insert(graph.edges.end(), above.begin(), above.end());
      continue;
    }
    if (candidates.empty()) {
      if (has_embedded_input) graph.no_candidates.insert(consumer.id);
      continue;
    }
    std::sort(candidates.begin(), candidates.end(), fallback_before);
    std::size_t keep = std::min<std::size_t>(candidates.size(),
                                             static_cast<std::size_t>(std::max(fallback_k, 0)));
    for (std::size_t i = 0; i < keep; ++i) {
      candidates[i].is_fallback = true;
      graph.edges.push_back(std::move(candidates[i]));
    }
  }
  return graph;
}

std::vector<DependencyEdge> producers_for(const Spdg& graph, std::string_view consumer_op,
                                          std::string_view consumer_field) {
  if (!graph.has_node(consumer_op)) {
    throw UnknownOperation("unknown operation '" + std::string(consumer_op) + "'");
  }
  std::vector<DependencyEdge> out;
  for (const auto& e : graph.edges) {
    if (e.consumer_op == consumer_op && e.consumer_field == consumer_field) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const DependencyEdge& a, const DependencyEdge& b) {
    double ra = a.success_rate();
    double rb = b.success_rate();
    return std::tie(rb, b.similarity, a.producer_op, a.producer_field, a.id) <
           std::tie(ra, a.similarity, b.producer_op, b.producer_field, b.id);
  });
  return out;
}

void record_observation(Spdg& graph, std::string_view edge_id, bool success) {
  for (auto& e : graph.edges) {
    if (e.id != edge_id) continue;
    ++e.observed_attempts;
    if (success) ++e.observed_successes;
    return;
  }
  throw UnknownEdge("unknown dependency edge '" + std::string(edge_id) + "'");
}

Json graph_to_json(const Spdg& graph) {
  Json edges = Json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"id", e.id},
                     {"producer_op", e.producer_op},
                     {"producer_field", e.producer_field},
                     {"consumer_op", e.consumer_op},
                     {"consumer_field", e.consumer_field},
                     {"similarity", e.similarity},
                     {"is_fallback", e.is_fallback},
                     {"observed_successes", e.observed_successes},
                     {"observed_attempts", e.observed_attempts}});
  }
  return {{"threshold", graph.threshold},
          {"fallback_k", graph.fallback_k},
          {"nodes", graph.nodes},
          {"no_candidates", Json(std::vector<std::string>(graph.no_candidates.begin(),
                                                          graph.no_candidates.end()))},
          {"edges", std::move(edges)}};
}

Spdg graph_from_json(const Json& doc) {
  try {
    Spdg graph;
    graph.threshold = doc.at("threshold").get<double>();
    graph.fallback_k = doc.at("fallback_k").get<int>();
    graph.nodes = doc.at("nodes").get<std::vector<std::string>>();
    for (const auto& name : doc.at("no_candidates")) {
      graph.no_candidates.insert(name.get<std::string>());
    }
    for (const auto& e : doc.at("edges")) {
      DependencyEdge edge;
      edge.id = e.at("id").get<std::string>();
      edge.producer_op = e.at("producer_op").get<std::string>();
      edge.producer_field = e.at("producer_field").get<std::string>();
      edge.consumer_op = e.at("consumer_op").get<std::string>();
      edge.consumer_field = e.at("consumer_field").get<std::string>();
      edge.similarity = e.at("similarity").get<double>();
      edge.is_fallback = e.at("is_fallback").get<bool>();
      edge.observed_successes = e.at("observed_successes").get<std::uint64_t>();
      edge.observed_attempts = e.at("observed_attempts").get<std::uint64_t>();
      graph.edges.push_back(std::move(edge));
    }
    return graph;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed dependency graph document: ") + e.what());
  }
}

}  // namespace resttest
