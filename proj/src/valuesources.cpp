#include "resttest/valuesources.hpp"

#include <algorithm>
#include <cmath>

namespace resttest {

namespace {

constexpr int kMaxValueDepth = kFlattenDepth;

Json random_string(Rng& rng, const SchemaConstraints& c) {
  std::size_t lo = c.min_length.value_or(1);
  std::size_t hi = c.max_length ? *c.max_length : std::max<std::size_t>(12, lo);
  if (!c.min_length) lo = std::min(lo, hi);
  if (lo > hi) hi = lo;
  std::uniform_int_distribution<std::size_t> length(lo, hi);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string out(length(rng), 'a');
  for (char& ch : out) ch = static_cast<char>(letter(rng));
  return out;
}

std::pair<double, double> numeric_range(const SchemaConstraints& c) {
  double lo = c.minimum.value_or(0.0);
  double hi = c.maximum.value_or(100.0);
  if (c.minimum && !c.maximum && lo > 100.0) hi = lo + 100.0;
  if (c.maximum && !c.minimum && hi < 0.0) lo = hi - 100.0;
  if (lo > hi) hi = lo;
  return {lo, hi};
}

Json default_value_at(const SchemaNode& schema, Rng& rng, int depth) {
  if (schema.example) return *schema.example;
  if (schema.enum_values && !schema.enum_values->empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, schema.enum_values->size() - 1);
    return (*schema.enum_values)[pick(rng)];
  }
  switch (schema.kind) {
    case SchemaKind::String:
      return random_string(rng, schema.constraints);
    case SchemaKind::Integer: {
      auto [lo, hi] = numeric_range(schema.constraints);
      auto ilo = static_cast<long long>(std::ceil(lo));
      auto ihi = static_cast<long long>(std::floor(hi));
      if (ilo > ihi) ihi = ilo;
      std::uniform_int_distribution<long long> pick(ilo, ihi);
      return pick(rng);
    }
    case SchemaKind::Number: {
      auto [lo, hi] = numeric_range(schema.constraints);
      if (lo == hi) return lo;
      std::uniform_real_distribution<double> pick(lo, hi);
      return pick(rng);
    }
    case SchemaKind::Boolean: {
      std::bernoulli_distribution coin(0.5);
      return coin(rng);
    }
    case SchemaKind::Array: {
      Json out = Json::array();
      if (depth >= kMaxValueDepth || !schema.items) return out;
      std::uniform_int_distribution<int> count(1, 3);
      int n = count(rng);
      for (int i = 0; i < n; ++i) out.push_back(default_value_at(*schema.items, rng, depth + 1));
      return out;
    }
    case SchemaKind::Object: {
      Json out = Json::object();
      if (depth >= kMaxValueDepth) return out;
      std::bernoulli_distribution coin(0.5);
      for (const auto& [name, child] : schema.properties) {
        if (schema.is_required(name) || coin(rng)) {
          out[name] = default_value_at(child, rng, depth + 1);
        }
      }
      return out;
    }
    case SchemaKind::Null:
      return nullptr;
  }
  return nullptr;
}

}  // namespace

Json default_value(const SchemaNode& schema, Rng& rng) {
  return default_value_at(schema, rng, 0);
}

bool conforms(const Json& value, const SchemaNode& schema) {
  if (schema.enum_values &&
      std::find(schema.enum_values->begin(), schema.enum_values->end(), value) ==
          schema.enum_values->end()) {
    return false;
  }
  const auto& c = schema.constraints;
  switch (schema.kind) {
    case SchemaKind::String: {
      if (!value.is_string()) return false;
      std::size_t n = value.get_ref<const std::string&>().size();
      return (!c.min_length || n >= *c.min_length) && (!c.max_length || n <= *c.max_length);
    }
    case SchemaKind::Integer:
    case SchemaKind::Number: {
      if (!value.is_number()) return false;
      double x = value.get<double>();
      if (schema.kind == SchemaKind::Integer && !value.is_number_integer() &&
          x != std::floor(x)) {
        return false;
      }
      return (!c.minimum || x >= *c.minimum) && (!c.maximum || x <= *c.maximum);
    }
    case SchemaKind::Boolean:
      return value.is_boolean();
    case SchemaKind::Array:
      if (!value.is_array()) return false;
      if (!schema.items) return true;
      return std::all_of(value.begin(), value.end(),
                         [&](const Json& v) { return conforms(v, *schema.items); });
    case SchemaKind::Object:
      if (!value.is_object()) return false;
      for (const auto& name : schema.required) {
        if (!value.contains(name)) return false;
      }
      for (const auto& [name, child] : schema.properties) {
        if (auto it = value.find(name); it != value.end() && !conforms(*it, child)) {
          return false;
        }
      }
      return true;
    case SchemaKind::Null:
      return value.is_null();
  }
  return false;
}

// --- ResponseStore ------------------------------------------------------------------

void ResponseStore::record(const std::string& operation_id, const std::string& field,
                           Json value) {
  auto& history = values_[operation_id][field];
  history.push_back(std::move(value));
  while (history.size() > capacity_) history.pop_front();
}

const std::deque<Json>& ResponseStore::history(std::string_view operation_id,
                                               std::string_view field) const {
  static const std::deque<Json> kEmpty;
  auto op = values_.find(operation_id);
  if (op == values_.end()) return kEmpty;
  auto it = op->second.find(field);
  return it == op->second.end() ? kEmpty : it->second;
}

bool ResponseStore::empty() const {
  for (const auto& [op, fields] : values_) {
    for (const auto& [field, history] : fields) {
      if (!history.empty()) return false;
    }
  }
  return true;
}

std::vector<const std::deque<Json>*> ResponseStore::all_histories() const {
  std::vector<const std::deque<Json>*> out;
  for (const auto& [op, fields] : values_) {
    for (const auto& [field, history] : fields) {
      if (!history.empty()) out.push_back(&history);
    }
  }
  return out;
}

std::optional<Json> dependency_value(const DependencyEdge& edge, const ResponseStore& store,
                                     Rng& rng) {
  const auto& history = store.history(edge.producer_op, edge.producer_field);
  if (history.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, history.size() - 1);
  return history[pick(rng)];
}

namespace {

void extract_into(const Json& node, std::string_view path, std::vector<Json>& out) {
  if (node.is_array()) {
    for (const auto& element : node) extract_into(element, path, out);
    return;
  }
  if (!node.is_object()) return;
  std::size_t dot = path.find('.');
  std::string head(path.substr(0, dot));
  auto it = node.find(head);
  if (it == node.end()) return;
  if (dot == std::string_view::npos) {
    out.push_back(*it);
  } else {
    extract_into(*it, path.substr(dot + 1), out);
  }
}

}  // namespace

std::vector<Json> extract_path(const Json& document, std::string_view path) {
  std::vector<Json> out;
  extract_into(document, path, out);
  return out;
}

}  // namespace resttest
