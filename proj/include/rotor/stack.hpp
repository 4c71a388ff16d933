#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotor/bounds.hpp"
#include "rotor/chain.hpp"
#include "rotor/rotor.hpp"

namespace rotor {

constexpr std::uint64_t kDefaultMaxPeriod = 1000000;

/// Periodic word over symbols 0..n−1 in which every prefix of length t holds
/// symbol i between p_i·t − 1 and p_i·t + 1 times.
class LowDiscrepancySequence {
 public:
  LowDiscrepancySequence(std::vector<Rational> p, std::vector<std::uint32_t> period);

  const std::vector<Rational>& probabilities() const { return p_; }
  std::size_t symbols() const { return p_.size(); }
  std::uint64_t period_length() const { return period_.size(); }
  const std::vector<std::uint32_t>& period() const { return period_; }
  // z_j for j ≥ 1.
  std::uint32_t at(std::uint64_t j) const { return period_[(j - 1) % period_.size()]; }
  // #{j ≤ n : z_j = i}
  std::uint64_t count(std::uint32_t i, std::uint64_t n) const;

 private:
  std::vector<Rational> p_;
  std::vector<std::uint32_t> period_;
  std::vector<std::vector<std::uint64_t>> positions_;  // 1-based, per symbol
};

/// Hall-matching construction over one period of length d = lcd(p), checked
/// on the full period before returning.
LowDiscrepancySequence low_discrepancy_sequence(const std::vector<Rational>& p,
                                                std::uint64_t max_period = kDefaultMaxPeriod);

/// Largest-remainder rounding of a real distribution to multiples of
/// 1/denominator; every entry stays positive.
std::vector<Rational> approximate_distribution(const std::vector<long double>& p,
                                               std::uint64_t denominator);

struct StackMechanism {
  // targets[u][i] is the vertex for symbol i at u.
  std::vector<std::vector<VertexId>> targets;
  std::vector<LowDiscrepancySequence> seq;

  std::size_t size() const { return targets.size(); }
  // u^(j), j ≥ 1.
  VertexId successor(VertexId u, std::uint64_t j) const { return targets[u][seq[u].at(j)]; }
};

StackMechanism build_stack_mechanism(const MarkovChain& chain,
                                     std::uint64_t max_period = kDefaultMaxPeriod);

/// The rotor mechanism that reproduces the stack walk from all-zero rotors.
RotorMechanism to_rotor_mechanism(const StackMechanism& mech);

WalkState start_stack_walk(const StackMechanism& mech, VertexId x0);

inline void stack_step(WalkState& s, const StackMechanism& mech) {
  const VertexId u = s.x;
  const std::uint64_t n = ++s.visits[u];
  ++s.t;
  s.x = mech.successor(u, n);
}

template <class Stop>
StopReason stack_run(WalkState& s, const StackMechanism& mech, Stop&& stop,
                     std::uint64_t max_steps) {
  for (std::uint64_t i = 0;; ++i) {
    if (stop(static_cast<const WalkState&>(s))) return StopReason::Hit;
    if (i == max_steps) return StopReason::Budget;
    stack_step(s, mech);
  }
}

/// D_n(u,v) = #{i ≤ n : u^(i) = v} − n p(u,v).
Rational discrepancy_D(const MarkovChain& chain, const StackMechanism& mech, VertexId u,
                       VertexId v, std::uint64_t n);

/// f(x_t) − f(x_0) + Σ_{u,v} D_{n_t(u)}(u,v)[f(u) − f(v) + Δf(u)].
Rational stack_identity_rhs(const MarkovChain& chain, const StackMechanism& mech,
                            const PotentialVector& f, VertexId x0, const WalkState& s);

struct StackReport {
  DiscrepancyReport report;
  std::uint64_t identity_checks = 0;
  std::uint64_t identity_failures = 0;
};

struct StackVerifyOptions {
  VerifyOptions verify;
  // Check the identity every this many steps (0 disables).
  std::uint64_t identity_stride = 1;
};

/// |h(a)(n_b+n_c) − n_b| ≤ K6 along the stack walk from a. Requires
/// p(b,a) = p(c,a) = 1; the identity is checked with f = h.
StackReport verify_stack_theorem(const MarkovChain& chain, const StackMechanism& mech,
                                 VertexId a, VertexId b, VertexId c, std::uint64_t horizon,
                                 const StackVerifyOptions& opt = {});

/// One line per period, symbols 1-based and space-separated.
std::string export_sequence(const LowDiscrepancySequence& seq, std::uint64_t periods = 1);

}  // namespace rotor
