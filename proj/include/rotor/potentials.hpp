#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rotor/chain.hpp"
#include "rotor/rational.hpp"

namespace rotor {

enum class PotentialKind { HittingProb, HittingTime, Stationary, ExpectedVisits, Arbitrary };

/// Exact rational function on the vertices of a chain. Entries may be
/// absent; reading an absent entry throws MissingValueError.
class PotentialVector {
 public:
  PotentialVector() = default;
  PotentialVector(PotentialKind kind, std::size_t n) : kind_(kind), values_(n) {}
  PotentialVector(PotentialKind kind, std::vector<Rational> values);

  PotentialKind kind() const { return kind_; }
  std::size_t size() const { return values_.size(); }
  bool has(VertexId v) const { return v < values_.size() && values_[v].has_value(); }
  const Rational& at(VertexId v) const;
  const Rational& operator[](VertexId v) const { return at(v); }
  void set(VertexId v, Rational value);

 private:
  PotentialKind kind_ = PotentialKind::Arbitrary;
  std::vector<std::optional<Rational>> values_;
};

/// (Δf)(u) = Σ_v p(u,v) f(v) − f(u).
Rational laplacian(const MarkovChain& chain, const PotentialVector& f, VertexId u);

/// h(v) = P_v(T_B < T_C) for disjoint target sets B, C.
PotentialVector solve_hitting_prob(const MarkovChain& chain, std::span<const VertexId> b_set,
                                   std::span<const VertexId> c_set);
PotentialVector solve_hitting_prob(const MarkovChain& chain, VertexId b, VertexId c);

/// k(v) = E_v T_b.
PotentialVector solve_hitting_time(const MarkovChain& chain, VertexId b);

/// Stationary distribution of a finite irreducible chain, summing to 1.
PotentialVector solve_stationary(const MarkovChain& chain);

/// e_{b,c} = P_b(T_c < T_b^+), computed as −Δh_{b,c}(b).
Rational escape_prob(const MarkovChain& chain, VertexId b, VertexId c);

/// g(v) = E_v #{t ≥ 0 : X_t = b}. Sink vertices (p(s,s)=1, s ≠ b) absorb
/// the walk and are never counted.
PotentialVector expected_visits(const MarkovChain& chain, VertexId b);

}  // namespace rotor
