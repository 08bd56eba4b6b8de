#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "resttest/embedding.hpp"
#include "resttest/json.hpp"
#include "resttest/oasmodel.hpp"

namespace resttest {

// Producer output field -> consumer input field match.
struct DependencyEdge {
  std::string id;
  std::string producer_op;
  std::string producer_field;
  std::string consumer_op;
  std::string consumer_field;
  double similarity = 0.0;
  bool is_fallback = false;
  std::uint64_t observed_successes = 0;
  std::uint64_t observed_attempts = 0;

  double success_rate() const {
    return observed_attempts == 0
               ? 0.0
               : static_cast<double>(observed_successes) /
                     static_cast<double>(observed_attempts);
  }
};

std::string make_edge_id(std::string_view producer_op, std::string_view producer_field,
                         std::string_view consumer_op, std::string_view consumer_field);

// Semantic property dependency graph over the operations of one ApiModel.
struct Spdg {
  std::vector<std::string> nodes;
  std::vector<DependencyEdge> edges;
  double threshold = 0.7;
  int fallback_k = 3;
  // Consumers with embeddable inputs but no defined similarity to any producer.
  std::set<std::string> no_candidates;

  bool has_node(std::string_view op) const;
  const DependencyEdge* find_edge(std::string_view edge_id) const;
};

inline constexpr double kDefaultSimilarityThreshold = 0.7;
inline constexpr int kDefaultFallbackK = 3;

// Adds an edge for every (output, input) pair across distinct operations
// whose similarity reaches `threshold`; consumers left without any such edge
// receive their `fallback_k` best candidates flagged as fallback.
Spdg build_graph(const ApiModel& model, const EmbeddingTable& table,
                 double threshold = kDefaultSimilarityThreshold,
                 int fallback_k = kDefaultFallbackK);

// Edges into (consumer_op, consumer_field) ordered by empirical success rate,
// then similarity, then producer id. Throws UnknownOperation.
std::vector<DependencyEdge> producers_for(const Spdg& graph, std::string_view consumer_op,
                                          std::string_view consumer_field);

// Throws UnknownEdge.
void record_observation(Spdg& graph, std::string_view edge_id, bool success);

Json graph_to_json(const Spdg& graph);
Spdg graph_from_json(const Json& doc);

}  // namespace resttest
