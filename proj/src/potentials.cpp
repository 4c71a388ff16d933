#include "rotor/potentials.hpp"

#include <algorithm>

#include "rotor/errors.hpp"
#include "rotor/linear_solve.hpp"

namespace rotor {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Solves x(u) − Σ_{v unknown} p(u,v) x(v) = rhs(u) over the vertices flagged
// unknown; fixed vertices contribute through rhs only.
std::vector<Rational> solve_on(const MarkovChain& chain, const std::vector<bool>& unknown,
                               const std::vector<Rational>& rhs, const char* what) {
  std::vector<std::size_t> slot(chain.size(), kNone);
  std::vector<VertexId> order;
  for (VertexId v = 0; v < chain.size(); ++v)
    if (unknown[v]) {
      slot[v] = order.size();
      order.push_back(v);
    }
  const std::size_t n = order.size();
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
  std::vector<Rational> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId u = order[i];
    a[i][i] += 1;
    for (const auto& tr : chain.row(u))
      if (slot[tr.target] != kNone) a[i][slot[tr.target]] -= tr.prob;
    b[i] = rhs[u];
  }
  auto x = solve_exact(a, b);
  if (!x) throw SingularSystemError(std::string("singular system while solving ") + what);
  std::vector<Rational> full(chain.size());
  for (std::size_t i = 0; i < n; ++i) full[order[i]] = std::move((*x)[i]);
  return full;
}

}  // namespace

PotentialVector::PotentialVector(PotentialKind kind, std::vector<Rational> values)
    : kind_(kind), values_(values.size()) {
  for (std::size_t i = 0; i < values.size(); ++i) values_[i] = std::move(values[i]);
}

const Rational& PotentialVector::at(VertexId v) const {
  if (!has(v)) throw MissingValueError("potential has no value at vertex " + std::to_string(v));
  return *values_[v];
}

void PotentialVector::set(VertexId v, Rational value) {
  if (v >= values_.size()) values_.resize(v + 1);
  values_[v] = std::move(value);
}

Rational laplacian(const MarkovChain& chain, const PotentialVector& f, VertexId u) {
  Rational acc = 0;
  for (const auto& tr : chain.row(u)) acc += tr.prob * f.at(tr.target);
  return acc - f.at(u);
}

PotentialVector solve_hitting_prob(const MarkovChain& chain, std::span<const VertexId> b_set,
                                   std::span<const VertexId> c_set) {
  if (b_set.empty() || c_set.empty()) throw SetupError("hitting targets must be non-empty");
  std::vector<int> role(chain.size(), 0);  // 1: in B, 2: in C
  for (auto b : b_set) role.at(b) = 1;
  for (auto c : c_set) {
    if (role.at(c) == 1) throw SetupError("hitting target sets must be disjoint");
    role[c] = 2;
  }
  std::vector<VertexId> targets(b_set.begin(), b_set.end());
  targets.insert(targets.end(), c_set.begin(), c_set.end());
  const auto reach = reaches(chain, targets);
  for (VertexId v = 0; v < chain.size(); ++v)
    if (!reach[v])
      throw SingularSystemError("vertex '" + chain.label(v) + "' cannot reach the targets");

  std::vector<bool> unknown(chain.size());
  std::vector<Rational> rhs(chain.size());
  for (VertexId u = 0; u < chain.size(); ++u) {
    unknown[u] = role[u] == 0;
    if (!unknown[u]) continue;
    for (const auto& tr : chain.row(u))
      if (role[tr.target] == 1) rhs[u] += tr.prob;
  }
  auto x = solve_on(chain, unknown, rhs, "hitting probabilities");
  for (VertexId u = 0; u < chain.size(); ++u)
    if (role[u]) x[u] = role[u] == 1 ? 1 : 0;
  return PotentialVector(PotentialKind::HittingProb, std::move(x));
}

PotentialVector solve_hitting_prob(const MarkovChain& chain, VertexId b, VertexId c) {
  if (b == c) throw SetupError("hitting probability needs b != c");
  return solve_hitting_prob(chain, std::span<const VertexId>(&b, 1),
                            std::span<const VertexId>(&c, 1));
}

PotentialVector solve_hitting_time(const MarkovChain& chain, VertexId b) {
  const auto reach = reaches(chain, std::span<const VertexId>(&b, 1));
  for (VertexId v = 0; v < chain.size(); ++v)
    if (!reach[v])
      throw SingularSystemError("vertex '" + chain.label(v) + "' cannot reach '" +
                                chain.label(b) + "'");
  std::vector<bool> unknown(chain.size(), true);
  unknown.at(b) = false;
  std::vector<Rational> rhs(chain.size(), Rational(1));
  auto x = solve_on(chain, unknown, rhs, "hitting times");
  x[b] = 0;
  return PotentialVector(PotentialKind::HittingTime, std::move(x));
}

PotentialVector solve_stationary(const MarkovChain& chain) {
  if (!is_irreducible(chain)) throw ReducibleChainError("stationary vector needs an irreducible chain");
  const std::size_t n = chain.size();
  // Rows j < n-1: (π(I − P))_j = 0; last row: Σ π = 1.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
  std::vector<Rational> rhs(n);
  for (VertexId i = 0; i < n; ++i) {
    if (i + 1 < n) a[i][i] += 1;
    for (const auto& tr : chain.row(i))
      if (tr.target + 1 < n) a[tr.target][i] -= tr.prob;
  }
  for (std::size_t i = 0; i < n; ++i) a[n - 1][i] = 1;
  rhs[n - 1] = 1;
  auto x = solve_exact(a, rhs);
  if (!x) throw SingularSystemError("singular stationary system");
  return PotentialVector(PotentialKind::Stationary, std::move(*x));
}

Rational escape_prob(const MarkovChain& chain, VertexId b, VertexId c) {
  const auto h = solve_hitting_prob(chain, b, c);
  return -laplacian(chain, h, b);
}

PotentialVector expected_visits(const MarkovChain& chain, VertexId b) {
  if (chain.is_sink(b))
    throw SingularSystemError("'" + chain.label(b) + "' is absorbing: infinitely many visits");
  const auto reach = reaches(chain, std::span<const VertexId>(&b, 1));
  std::vector<bool> unknown(chain.size());
  std::vector<Rational> rhs(chain.size());
  for (VertexId u = 0; u < chain.size(); ++u) unknown[u] = reach[u];
  rhs.at(b) = 1;
  std::vector<Rational> x;
  try {
    x = solve_on(chain, unknown, rhs, "expected visits");
  } catch (const SingularSystemError&) {
    throw SingularSystemError("no escape route: '" + chain.label(b) +
                              "' is visited infinitely often");
  }
  return PotentialVector(PotentialKind::ExpectedVisits, std::move(x));
}

}  // namespace rotor
