#include "rotor/random_chain.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace rotor {

namespace {

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

template <class T>
void shuffle(std::mt19937_64& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

// Row from u over `targets` (first entry mandatory), with a random
// denominator and composition.
void add_random_row(ChainBuilder& b, std::mt19937_64& rng, VertexId u,
                    std::vector<VertexId> targets, unsigned max_den) {
  const std::uint64_t den = draw(rng, 1, max_den);
  if (targets.size() > den) targets.resize(den);
  auto parts = random_composition(rng, den, static_cast<unsigned>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i)
    b.add_edge(u, targets[i],
               make_rational(static_cast<std::int64_t>(parts[i]), static_cast<std::int64_t>(den)));
}

}  // namespace

std::vector<std::uint64_t> random_composition(std::mt19937_64& rng, std::uint64_t total,
                                              unsigned n) {
  // n−1 distinct cut points in [1, total−1].
  std::vector<std::uint64_t> cuts(total > 0 ? total - 1 : 0);
  std::iota(cuts.begin(), cuts.end(), 1);
  shuffle(rng, cuts);
  cuts.resize(n - 1);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::uint64_t> parts;
  std::uint64_t prev = 0;
  for (auto c : cuts) {
    parts.push_back(c - prev);
    prev = c;
  }
  parts.push_back(total - prev);
  return parts;
}

MarkovChain random_irreducible_chain(std::mt19937_64& rng, const RandomChainOptions& opt) {
  const unsigned n = static_cast<unsigned>(draw(rng, opt.min_vertices, opt.max_vertices));
  std::vector<VertexId> cycle(n);
  std::iota(cycle.begin(), cycle.end(), 0);
  shuffle(rng, cycle);
  std::vector<VertexId> next(n);
  for (unsigned i = 0; i < n; ++i) next[cycle[i]] = cycle[(i + 1) % n];

  ChainBuilder b;
  for (unsigned i = 0; i < n; ++i) b.add_vertex("v" + std::to_string(i));
  for (VertexId u = 0; u < n; ++u) {
    std::vector<VertexId> others;
    for (VertexId v = 0; v < n; ++v)
      if (v != next[u]) others.push_back(v);
    shuffle(rng, others);
    const unsigned k = static_cast<unsigned>(draw(rng, 1, std::min<unsigned>(opt.max_out, n)));
    std::vector<VertexId> targets{next[u]};
    targets.insert(targets.end(), others.begin(), others.begin() + (k - 1));
    add_random_row(b, rng, u, std::move(targets), opt.max_den);
  }
  return std::move(b).build();
}

PotentialVector random_potential(std::mt19937_64& rng, std::size_t n) {
  PotentialVector f(PotentialKind::Arbitrary, n);
  for (VertexId v = 0; v < n; ++v) {
    const auto num = static_cast<std::int64_t>(draw(rng, 0, 40)) - 20;
    const auto den = static_cast<std::int64_t>(draw(rng, 1, 9));
    f.set(v, make_rational(num, den));
  }
  return f;
}

MarkovChain random_sink_chain(std::mt19937_64& rng, unsigned vertices, unsigned sinks,
                              unsigned max_den) {
  const unsigned m = vertices - sinks;
  ChainBuilder b;
  for (unsigned i = 0; i < m; ++i) b.add_vertex("v" + std::to_string(i));
  for (unsigned i = 0; i < sinks; ++i) b.add_vertex("s" + std::to_string(i));
  for (VertexId u = 0; u < m; ++u) {
    // The mandatory edge u -> u+1 (or into a sink) makes every sink-ward path exist.
    const VertexId forced = u + 1 < m ? u + 1 : m + static_cast<VertexId>(rng() % sinks);
    std::vector<VertexId> others;
    for (VertexId v = 0; v < vertices; ++v)
      if (v != forced) others.push_back(v);
    shuffle(rng, others);
    const unsigned k = static_cast<unsigned>(draw(rng, 1, 3));
    std::vector<VertexId> targets{forced};
    targets.insert(targets.end(), others.begin(), others.begin() + (k - 1));
    add_random_row(b, rng, u, std::move(targets), max_den);
  }
  for (VertexId s = m; s < vertices; ++s) b.add_edge(s, s, Rational(1));
  return std::move(b).build();
}

}  // namespace rotor
