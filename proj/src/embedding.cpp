#include "resttest/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "resttest/errors.hpp"

namespace resttest {

EmbeddingTable::EmbeddingTable(std::size_t dimension,
                               std::unordered_map<std::string, Vector> vectors)
    : dimension_(dimension), vectors_(std::move(vectors)) {
  if (vectors_.empty() || dimension_ == 0) throw EmptyTable("embedding table is empty");
}

const Vector* EmbeddingTable::find(std::string_view token) const {
  auto it = vectors_.find(std::string(token));
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable read_embeddings(std::istream& in) {
  std::unordered_map<std::string, Vector> vectors;
  std::size_t dimension = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    Vector values;
    values.reserve(dimension);
    std::string number;
    while (fields >> number) {
      try {
        values.push_back(std::stod(number));
      } catch (const std::exception&) {
        throw Error("embedding line " + std::to_string(line_no) +
                    ": invalid number '" + number + "'");
      }
    }
    if (dimension == 0) {
      if (values.empty()) throw DimensionMismatch(line_no, 1, 0);
      dimension = values.size();
    } else if (values.size() != dimension) {
      throw DimensionMismatch(line_no, dimension, values.size());
    }
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    vectors.emplace(std::move(token), std::move(values));
  }
  if (vectors.empty()) throw EmptyTable("embedding table is empty");
  return EmbeddingTable(dimension, std::move(vectors));
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file '" + path + "'");
  return read_embeddings(in);
}

std::vector<std::string> tokenize_identifier(std::string_view name) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  auto is_upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  auto is_lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };

  for (std::size_t i = 0; i < name.size(); ++i) {
    char c = name[i];
    if (!std::isalnum(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    if (!current.empty()) {
      char prev = name[i - 1];
      bool boundary = (is_digit(prev) != is_digit(c)) ||
                      (is_lower(prev) && is_upper(c)) ||
                      (is_upper(prev) && is_upper(c) && i + 1 < name.size() &&
                       is_lower(name[i + 1]));
      if (boundary) flush();
    }
    current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  flush();
  return tokens;
}

std::optional<Vector> field_vector(const std::vector<std::string>& tokens,
                                   const EmbeddingTable& table) {
  Vector sum(table.dimension(), 0.0);
  std::size_t found = 0;
  for (const auto& token : tokens) {
    const Vector* v = table.find(token);
    if (!v) continue;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++found;
  }
  if (found == 0) return std::nullopt;
  for (double& x : sum) x /= static_cast<double>(found);
  return sum;
}

double similarity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error("similarity: dimension mismatch (" + std::to_string(a.size()) +
                " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroVector("similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

NamedField make_named_field(std::string raw_name, const EmbeddingTable& table) {
  NamedField field;
  field.tokens = tokenize_identifier(raw_name);
  field.vector = field_vector(field.tokens, table);
  field.raw_name = std::move(raw_name);
  return field;
}

}  // namespace resttest
