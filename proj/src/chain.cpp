#include "rotor/chain.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rotor/errors.hpp"

namespace rotor {

namespace {

constexpr unsigned kUnreached = std::numeric_limits<unsigned>::max();

std::string split_label(const std::string& base, int copy) {
  return base + "#" + std::to_string(copy);
}

}  // namespace

std::optional<VertexId> MarkovChain::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VertexId MarkovChain::id(std::string_view label) const {
  auto v = find(label);
  if (!v) throw DanglingVertexError("unknown vertex '" + std::string(label) + "'");
  return *v;
}

Rational MarkovChain::prob(VertexId u, VertexId v) const {
  for (const auto& tr : rows_.at(u))
    if (tr.target == v) return tr.prob;
  return Rational(0);
}

bool MarkovChain::is_sink(VertexId v) const {
  const auto& r = rows_.at(v);
  return r.size() == 1 && r[0].target == v;
}

std::vector<VertexId> MarkovChain::sinks() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < size(); ++v)
    if (is_sink(v)) out.push_back(v);
  return out;
}

VertexId ChainBuilder::add_vertex(std::string label) {
  if (chain_.index_.count(label))
    throw ChainSpecError("duplicate vertex '" + label + "'");
  auto id = static_cast<VertexId>(chain_.labels_.size());
  chain_.index_.emplace(label, id);
  chain_.labels_.push_back(std::move(label));
  chain_.rows_.emplace_back();
  return id;
}

std::optional<VertexId> ChainBuilder::find(std::string_view label) const {
  return chain_.find(label);
}

void ChainBuilder::add_edge(VertexId from, VertexId to, Rational prob) {
  if (from >= chain_.size() || to >= chain_.size())
    throw DanglingVertexError("edge endpoint out of range");
  if (prob <= 0)
    throw NegativeProbError("non-positive probability " + prob.get_str() + " on edge " +
                            chain_.labels_[from] + "->" + chain_.labels_[to]);
  for (const auto& tr : chain_.rows_[from])
    if (tr.target == to)
      throw ChainSpecError("duplicate edge " + chain_.labels_[from] + "->" +
                           chain_.labels_[to]);
  chain_.rows_[from].push_back({to, std::move(prob)});
}

void ChainBuilder::add_edge(std::string_view from, std::string_view to, Rational prob) {
  auto f = chain_.find(from);
  if (!f) throw DanglingVertexError("edge source '" + std::string(from) + "' not declared");
  auto t = chain_.find(to);
  if (!t) throw DanglingVertexError("edge target '" + std::string(to) + "' not declared");
  add_edge(*f, *t, std::move(prob));
}

MarkovChain ChainBuilder::build() && {
  for (VertexId u = 0; u < chain_.size(); ++u) {
    auto& row = chain_.rows_[u];
    std::sort(row.begin(), row.end(),
              [](const Transition& x, const Transition& y) { return x.target < y.target; });
    Rational sum = 0;
    for (const auto& tr : row) {
      if (tr.prob > 1)
        throw NegativeProbError("probability above 1 in row of '" + chain_.labels_[u] + "'");
      sum += tr.prob;
    }
    if (sum != 1)
      throw RowSumError("row of '" + chain_.labels_[u] + "' sums to " + sum.get_str());
  }
  return std::move(chain_);
}

MarkovChain build_chain(const ChainSpec& spec) {
  ChainBuilder b;
  for (const auto& v : spec.vertices) b.add_vertex(v);
  for (const auto& e : spec.edges) {
    if (e.den <= 0)
      throw ChainSpecError("non-positive denominator on edge " + e.from + "->" + e.to);
    if (e.num < 0)
      throw NegativeProbError("negative probability on edge " + e.from + "->" + e.to);
    b.add_edge(e.from, e.to, make_rational(e.num, e.den));
  }
  for (const auto& s : spec.sinks) {
    auto id = b.find(s);
    if (!id) throw DanglingVertexError("sink '" + s + "' not declared");
    bool has_edges = std::any_of(spec.edges.begin(), spec.edges.end(),
                                 [&](const EdgeSpec& e) { return e.from == s; });
    if (!has_edges) b.add_edge(*id, *id, Rational(1));
  }
  auto chain = std::move(b).build();
  for (const auto& s : spec.sinks)
    if (!chain.is_sink(chain.id(s)))
      throw ChainSpecError("declared sink '" + s + "' has outgoing edges");
  return chain;
}

ChainSpec parse_chain_spec(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ChainSpecError(std::string("malformed chain JSON: ") + e.what());
  }
  ChainSpec spec;
  try {
    for (const auto& v : doc.at("vertices")) spec.vertices.push_back(v.get<std::string>());
    for (const auto& e : doc.at("edges")) {
      EdgeSpec es;
      es.from = e.at("from").get<std::string>();
      es.to = e.at("to").get<std::string>();
      es.num = e.at("num").get<std::int64_t>();
      es.den = e.at("den").get<std::int64_t>();
      spec.edges.push_back(std::move(es));
    }
    if (doc.contains("sinks"))
      for (const auto& s : doc.at("sinks")) spec.sinks.push_back(s.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ChainSpecError(std::string("bad chain JSON field: ") + e.what());
  }
  return spec;
}

ChainSpec load_chain_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ChainSpecError("cannot open chain file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_chain_spec(ss.str());
}

ChainSpec to_chain_spec(const MarkovChain& chain) {
  ChainSpec spec;
  spec.vertices = chain.labels();
  for (VertexId u = 0; u < chain.size(); ++u)
    for (const auto& tr : chain.row(u))
      spec.edges.push_back({chain.label(u), chain.label(tr.target), tr.prob.get_num().get_si(),
                            tr.prob.get_den().get_si()});
  return spec;
}

std::string to_json(const ChainSpec& spec) {
  nlohmann::ordered_json doc;
  doc["vertices"] = spec.vertices;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : spec.edges)
    edges.push_back({{"from", e.from}, {"to", e.to}, {"num", e.num}, {"den", e.den}});
  doc["edges"] = std::move(edges);
  if (!spec.sinks.empty()) doc["sinks"] = spec.sinks;
  return doc.dump(2) + "\n";
}

MarkovChain redirect_to(const MarkovChain& chain, std::span<const VertexId> sources,
                        VertexId a) {
  std::vector<bool> is_source(chain.size(), false);
  for (auto s : sources) {
    if (s == a) throw SelfRedirectError("cannot redirect '" + chain.label(a) + "' to itself");
    is_source.at(s) = true;
  }
  ChainBuilder b;
  for (const auto& l : chain.labels()) b.add_vertex(l);
  for (VertexId u = 0; u < chain.size(); ++u) {
    if (is_source[u]) {
      b.add_edge(u, a, Rational(1));
    } else {
      for (const auto& tr : chain.row(u)) b.add_edge(u, tr.target, tr.prob);
    }
  }
  return std::move(b).build();
}

std::vector<bool> reaches(const MarkovChain& chain, std::span<const VertexId> targets) {
  std::vector<std::vector<VertexId>> reverse(chain.size());
  for (VertexId u = 0; u < chain.size(); ++u)
    for (const auto& tr : chain.row(u)) reverse[tr.target].push_back(u);
  std::vector<bool> seen(chain.size(), false);
  std::deque<VertexId> queue;
  for (auto t : targets) {
    if (!seen.at(t)) {
      seen[t] = true;
      queue.push_back(t);
    }
  }
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (auto u : reverse[v]) {
      if (!seen[u]) {
        seen[u] = true;
        queue.push_back(u);
      }
    }
  }
  return seen;
}

std::vector<unsigned> bfs_distance(const MarkovChain& chain, VertexId from) {
  std::vector<unsigned> dist(chain.size(), kUnreached);
  std::deque<VertexId> queue{from};
  dist.at(from) = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (const auto& tr : chain.row(u)) {
      if (dist[tr.target] == kUnreached) {
        dist[tr.target] = dist[u] + 1;
        queue.push_back(tr.target);
      }
    }
  }
  return dist;
}

bool is_irreducible(const MarkovChain& chain) {
  if (chain.size() == 0) return false;
  auto dist = bfs_distance(chain, 0);
  if (std::any_of(dist.begin(), dist.end(), [](unsigned d) { return d == kUnreached; }))
    return false;
  VertexId root = 0;
  auto back = reaches(chain, std::span<const VertexId>(&root, 1));
  return std::all_of(back.begin(), back.end(), [](bool b) { return b; });
}

SplitChain split_and_truncate(const MarkovChain& chain, VertexId a, std::optional<unsigned> d) {
  if (d && *d == 0) throw ChainSpecError("truncation radius must be at least 1");
  const auto dist = bfs_distance(chain, a);
  const unsigned radius = d.value_or(kUnreached);

  // New ids: kept vertices in original order (a becomes a0), then a1.
  std::vector<VertexId> remap(chain.size(), std::numeric_limits<VertexId>::max());
  ChainBuilder b;
  SplitChain out{};
  for (VertexId v = 0; v < chain.size(); ++v) {
    const bool keep = d ? dist[v] <= radius : true;
    if (!keep) continue;
    remap[v] = b.add_vertex(v == a ? split_label(chain.label(a), 0) : chain.label(v));
  }
  out.a0 = remap[a];
  out.a1 = b.add_vertex(split_label(chain.label(a), 1));

  for (VertexId v = 0; v < chain.size(); ++v) {
    if (remap[v] == std::numeric_limits<VertexId>::max()) continue;
    if (d && v != a && dist[v] == radius) {
      b.add_edge(remap[v], out.a0, Rational(1));
      out.boundary.push_back(remap[v]);
      continue;
    }
    for (const auto& tr : chain.row(v)) {
      VertexId target = tr.target == a ? out.a1 : remap[tr.target];
      if (target == std::numeric_limits<VertexId>::max())
        throw DanglingVertexError("truncation lost target of '" + chain.label(v) + "'");
      b.add_edge(remap[v], target, tr.prob);
    }
  }
  b.add_edge(out.a1, out.a0, Rational(1));
  out.chain = std::move(b).build();
  return out;
}

SplitChain split_and_truncate(const RowOracle& oracle, const std::string& a, unsigned d) {
  if (d == 0) throw ChainSpecError("truncation radius must be at least 1");
  // Breadth-first closure; rows are only generated for vertices strictly
  // inside the radius.
  std::vector<std::string> order{a};
  std::unordered_map<std::string, unsigned> dist{{a, 0}};
  std::unordered_map<std::string, std::vector<std::pair<std::string, Rational>>> rows;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string u = order[i];
    const unsigned du = dist.at(u);
    if (du == d) continue;
    auto row = oracle(u);
    for (const auto& [v, p] : row) {
      if (!dist.count(v)) {
        dist.emplace(v, du + 1);
        order.push_back(v);
      }
    }
    rows.emplace(u, std::move(row));
  }

  ChainBuilder b;
  SplitChain out{};
  for (const auto& v : order) b.add_vertex(v == a ? split_label(a, 0) : v);
  out.a0 = 0;
  out.a1 = b.add_vertex(split_label(a, 1));
  for (VertexId id = 0; id < order.size(); ++id) {
    const auto& v = order[id];
    if (v != a && dist.at(v) == d) {
      b.add_edge(id, out.a0, Rational(1));
      out.boundary.push_back(id);
      continue;
    }
    for (const auto& [t, p] : rows.at(v)) {
      VertexId target = t == a ? out.a1 : *b.find(t);
      b.add_edge(id, target, p);
    }
  }
  b.add_edge(out.a1, out.a0, Rational(1));
  out.chain = std::move(b).build();
  return out;
}

}  // namespace rotor
