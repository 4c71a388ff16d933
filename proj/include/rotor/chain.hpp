#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rotor/rational.hpp"

namespace rotor {

using VertexId = std::uint32_t;

struct Transition {
  VertexId target;
  Rational prob;
};

/// A finite Markov chain with exact rational transition probabilities.
///
/// Vertices carry opaque string labels and are addressed by dense ids in
/// declaration order. Each row is sorted by target id, has no duplicate
/// targets, only strictly positive entries, and sums to exactly 1. Instances
/// are immutable once built; the surgeries below return new chains.
class MarkovChain {
 public:
  MarkovChain() = default;

  std::size_t size() const { return labels_.size(); }
  const std::string& label(VertexId v) const { return labels_.at(v); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<VertexId> find(std::string_view label) const;
  // Throws DanglingVertexError for unknown labels.
  VertexId id(std::string_view label) const;

  std::span<const Transition> row(VertexId u) const { return rows_.at(u); }
  Rational prob(VertexId u, VertexId v) const;
  bool is_sink(VertexId v) const;
  std::vector<VertexId> sinks() const;

 private:
  friend class ChainBuilder;
  std::vector<std::string> labels_;
  std::vector<std::vector<Transition>> rows_;
  std::unordered_map<std::string, VertexId> index_;
};

/// Incremental, validating constructor for MarkovChain.
class ChainBuilder {
 public:
  VertexId add_vertex(std::string label);
  void add_edge(VertexId from, VertexId to, Rational prob);
  void add_edge(std::string_view from, std::string_view to, Rational prob);
  std::optional<VertexId> find(std::string_view label) const;
  std::size_t size() const { return chain_.size(); }
  // Validates every row (positivity, no duplicates, exact unit sum).
  MarkovChain build() &&;

 private:
  MarkovChain chain_;
};

struct EdgeSpec {
  std::string from;
  std::string to;
  std::int64_t num = 0;
  std::int64_t den = 1;
};

/// Structured chain description, the in-memory form of the JSON document
/// {"vertices":[...], "edges":[{"from","to","num","den"}...], "sinks":[...]}.
struct ChainSpec {
  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;
  std::vector<std::string> sinks;
};

MarkovChain build_chain(const ChainSpec& spec);
ChainSpec parse_chain_spec(std::string_view json_text);
ChainSpec load_chain_spec(const std::string& path);
ChainSpec to_chain_spec(const MarkovChain& chain);
std::string to_json(const ChainSpec& spec);

/// Replaces the row of every source with {a:1}.
MarkovChain redirect_to(const MarkovChain& chain, std::span<const VertexId> sources,
                        VertexId a);

struct SplitChain {
  MarkovChain chain;
  VertexId a0;  // outgoing copy of the split vertex
  VertexId a1;  // incoming copy; its only transition is to a0
  // Vertices at graph distance exactly d from a, whose rows now go to a0.
  std::vector<VertexId> boundary;
};

/// Splits `a` into a0 (outgoing edges) and a1 (incoming edges, p(a1,a0)=1).
/// With a radius d, every vertex at graph distance exactly d from a is
/// redirected to a0 and vertices unreachable from a0 are pruned. Without a
/// radius the vertex set is kept (a keeps its id as a0, a1 is appended).
SplitChain split_and_truncate(const MarkovChain& chain, VertexId a,
                              std::optional<unsigned> d);

/// Lazily generated (possibly infinite) chain: label -> outgoing row.
using RowOracle = std::function<std::vector<std::pair<std::string, Rational>>(
    const std::string&)>;

/// Breadth-first closure of radius d around `a` in a generated chain,
/// followed by the same split/redirect surgery as above.
SplitChain split_and_truncate(const RowOracle& oracle, const std::string& a,
                              unsigned d);

// Graph helpers on the support of the transition kernel.
std::vector<bool> reaches(const MarkovChain& chain, std::span<const VertexId> targets);
std::vector<unsigned> bfs_distance(const MarkovChain& chain, VertexId from);
bool is_irreducible(const MarkovChain& chain);

}  // namespace rotor
