#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rotor/chain.hpp"
#include "rotor/potentials.hpp"

namespace rotor {

// Seeded generators for the property suites. Everything is drawn through
// rng() % n so that results do not depend on the standard library's
// distribution implementations.

struct RandomChainOptions {
  unsigned min_vertices = 3;
  unsigned max_vertices = 12;
  unsigned max_den = 6;
  unsigned max_out = 4;
};

/// Irreducible chain: every row contains the edge to the next vertex of a
/// random Hamiltonian cycle.
MarkovChain random_irreducible_chain(std::mt19937_64& rng, const RandomChainOptions& opt = {});

/// Random rational function, numerators in [-20,20], denominators in [1,9].
PotentialVector random_potential(std::mt19937_64& rng, std::size_t n);

/// Positive integer parts summing to total, n ≤ total.
std::vector<std::uint64_t> random_composition(std::mt19937_64& rng, std::uint64_t total,
                                              unsigned n);

/// Chain whose last `sinks` vertices are absorbing and reachable from every
/// other vertex.
MarkovChain random_sink_chain(std::mt19937_64& rng, unsigned vertices, unsigned sinks,
                              unsigned max_den = 6);

}  // namespace rotor
