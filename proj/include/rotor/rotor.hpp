#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rotor/chain.hpp"
#include "rotor/potentials.hpp"
#include "rotor/rational.hpp"

namespace rotor {

/// Per-vertex successor lists. succ[u][i] is the target emitted when the
/// rotor at u is advanced to residue i; residues are 0-based.
struct RotorMechanism {
  std::vector<std::vector<VertexId>> succ;

  std::size_t size() const { return succ.size(); }
  std::uint32_t degree(VertexId u) const { return static_cast<std::uint32_t>(succ[u].size()); }
};

enum class OrderKind { ById, Shuffled };

struct OrderingPolicy {
  OrderKind kind = OrderKind::ById;
  std::uint64_t seed = 0;
  // Overrides for individual vertices; the list length may be any multiple
  // of the row's lowest common denominator.
  std::map<VertexId, std::vector<VertexId>> explicit_lists;
};

/// d(u) = lcm of the row's denominators; target v appears d(u)·p(u,v) times.
/// ById lists equal targets consecutively in id order; Shuffled applies a
/// seeded permutation to that multiset.
RotorMechanism derive_mechanism(const MarkovChain& chain, const OrderingPolicy& policy = {});

/// Throws OrderingMismatchError unless succ(u) realizes row u exactly.
void check_mechanism(const MarkovChain& chain, const RotorMechanism& mech);

using RotorConfig = std::vector<std::uint32_t>;

struct WalkState {
  std::uint64_t t = 0;
  VertexId x = 0;
  RotorConfig rotor;
  std::vector<std::uint64_t> visits;
};

WalkState start_walk(const RotorMechanism& mech, RotorConfig r0, VertexId x0);

inline void step(WalkState& s, const RotorMechanism& mech) {
  const VertexId u = s.x;
  const auto& out = mech.succ[u];
  std::uint32_t r = s.rotor[u] + 1;
  if (r == out.size()) r = 0;
  s.rotor[u] = r;
  ++s.visits[u];
  ++s.t;
  s.x = out[r];
}

enum class StopReason { Hit, Budget };

/// Steps until stop(state) holds (tested before every step) or max_steps
/// steps have been taken.
template <class Stop>
StopReason run_until(WalkState& s, const RotorMechanism& mech, Stop&& stop,
                     std::uint64_t max_steps) {
  for (std::uint64_t i = 0;; ++i) {
    if (stop(static_cast<const WalkState&>(s))) return StopReason::Hit;
    if (i == max_steps) return StopReason::Budget;
    step(s, mech);
  }
}

/// φ(u,ρ) = Σ_{i=1..ρ} [f(u) − f(u^(i)) + Δf(u)], with u^(i) = succ[u][i mod d].
Rational phi(const MarkovChain& chain, const RotorMechanism& mech, const PotentialVector& f,
             VertexId u, std::uint32_t rho);

/// Follows a walk and keeps Σ_{s<t} Δf(x_s) and Φ(x_t, r_t) up to date.
class PotentialTracker {
 public:
  PotentialTracker(const MarkovChain& chain, const RotorMechanism& mech, PotentialVector f,
                   const WalkState& initial);

  // Call with the state just before step(); updates both running values.
  void before_step(const WalkState& s);

  const PotentialVector& f() const { return f_; }
  const Rational& laplacian_sum() const { return lap_sum_; }
  const Rational& phi() const { return phi_; }
  const Rational& phi0() const { return phi0_; }
  VertexId x0() const { return x0_; }
  const RotorConfig& r0() const { return r0_; }

 private:
  const MarkovChain* chain_;
  const RotorMechanism* mech_;
  PotentialVector f_;
  std::vector<Rational> lap_;
  VertexId x0_;
  RotorConfig r0_;
  Rational lap_sum_;
  Rational phi_;
  Rational phi0_;
};

struct IdentitySides {
  Rational lhs;
  Rational rhs;
};

/// lhs: the tracker's running Σ Δf(x_s). rhs: f(x_t) − f(x_0) + Σ_u [φ(u,r_t(u)) − φ(u,r_0(u))],
/// recomputed from scratch.
IdentitySides check_key_identity(const MarkovChain& chain, const RotorMechanism& mech,
                                 const PotentialTracker& tracker, const WalkState& state);

struct Period {
  std::uint64_t preperiod;
  std::uint64_t period;
};

/// Brent cycle detection on (x_t, r_t). Returns nullopt if the cycle is not
/// closed within max_steps steps.
std::optional<Period> detect_period(const RotorMechanism& mech, const RotorConfig& r0, VertexId x0,
                                    std::uint64_t max_steps);

// "t,x,rotor_at_x" rows for the next `steps` steps; residues printed 1-based.
void write_trajectory_csv(std::ostream& out, const MarkovChain& chain, const RotorMechanism& mech,
                          WalkState state, std::uint64_t steps);
std::string rotor_snapshot_json(const MarkovChain& chain, const RotorMechanism& mech,
                                const RotorConfig& r);

inline std::uint32_t display_residue(std::uint32_t r, std::uint32_t d) { return r == 0 ? d : r; }

}  // namespace rotor
