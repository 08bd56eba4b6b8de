#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace resttest {

using Vector = std::vector<double>;

// Word vectors in GloVe text layout. Immutable once loaded.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dimension, std::unordered_map<std::string, Vector> vectors);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const Vector* find(std::string_view token) const;

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, Vector> vectors_;
};

// Throws DimensionMismatch (1-based line) or EmptyTable; also Error when the
// file cannot be opened.
EmbeddingTable load_embeddings(const std::string& path);
EmbeddingTable read_embeddings(std::istream& in);

// Splits API identifiers into lowercase word tokens: separators are any
// non-alphanumeric character, letter/digit transitions, lower->upper
// transitions, and the last capital of an acronym run followed by lowercase.
std::vector<std::string> tokenize_identifier(std::string_view name);

// Mean of in-vocabulary token vectors; nullopt when every token is OOV.
std::optional<Vector> field_vector(const std::vector<std::string>& tokens,
                                   const EmbeddingTable& table);

// Cosine similarity clamped to [-1, 1]. Throws ZeroVector for a zero-norm
// input and Error for mismatched dimensions.
double similarity(const Vector& a, const Vector& b);

struct NamedField {
  std::string raw_name;
  std::vector<std::string> tokens;
  std::optional<Vector> vector;
};

NamedField make_named_field(std::string raw_name, const EmbeddingTable& table);

}  // namespace resttest
