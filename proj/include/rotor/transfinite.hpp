#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "rotor/bounds.hpp"
#include "rotor/chain.hpp"
#include "rotor/lattice.hpp"
#include "rotor/rotor.hpp"

namespace rotor {

/// A countable chain with a rotor mechanism, described by local rules. Sites
/// are lattice points; one-dimensional families keep y = 0. Every move turns
/// the rotor by one and then follows successor(v, rotor).
class ChainFamily {
 public:
  virtual ~ChainFamily() = default;
  virtual std::string name() const = 0;
  virtual std::uint32_t degree(LatticePoint v) const = 0;
  virtual LatticePoint successor(LatticePoint v, std::uint32_t i) const = 0;
  virtual std::uint32_t initial_rotor(LatticePoint v) const = 0;
  // Graph distance of the support.
  virtual std::uint64_t distance(LatticePoint u, LatticePoint v) const = 0;
  virtual bool planar() const { return false; }

  // "x" for one-dimensional families, "x,y" otherwise.
  virtual std::string label(LatticePoint v) const;
  virtual LatticePoint parse(const std::string& label) const;
  // Rows with multiplicities over degree, as a lazily generated chain.
  RowOracle oracle() const;
  // Explicit successor lists of the finite chain `split` in its own ids,
  // matching the family at every kept vertex, and its initial rotors. The
  // split copy a1 and the boundary get the single successor a0.
  std::pair<RotorMechanism, RotorConfig> mechanism_on(const SplitChain& split,
                                                      LatticePoint a) const;
};

/// Simple random walk on ℤ, successors [x−1, x+1], every rotor set so that
/// its first move goes right.
std::unique_ptr<ChainFamily> integer_line();
/// p(x,x+1) = 2/3, successors [x−1, x+1, x+1], first move right.
std::unique_ptr<ChainFamily> drifted_line();
/// Simple random walk on ℤ² with every rotor pointing East, so that each
/// first move is North.
std::unique_ptr<ChainFamily> lattice_all_east();
/// Compass mechanism with the sector configuration used for hitting times.
std::unique_ptr<ChainFamily> lattice_sectors();
/// A finite chain seen as a family: vertex id v is the site (v, 0).
std::unique_ptr<ChainFamily> finite_family(MarkovChain chain, RotorMechanism mech, RotorConfig r0);
/// "line", "drifted", "z2-east" or "z2-sectors"; throws UsageError.
std::unique_ptr<ChainFamily> make_family(const std::string& name);

/// base with the sources sent to target in one step (degree one).
std::unique_ptr<ChainFamily> redirected(std::shared_ptr<const ChainFamily> base,
                                        std::vector<LatticePoint> sources, LatticePoint target);

struct EscapePolicy {
  std::uint64_t d0 = 4;
  std::uint64_t d_max = 1 << 16;
  // Steps allowed per truncation level.
  std::uint64_t max_steps = 500000000ULL;
};

/// One run of the walk from a until it comes back to a or escapes.
struct Excursion {
  bool escaped = false;
  std::uint64_t steps = 0;  // up to the return, or up to reaching the radius
  std::vector<std::uint64_t> visits;  // to each tracked site
  bool operator==(const Excursion&) const = default;
};

/// Rotor walk on the family truncated at radius d: reaching distance d from
/// a ends the current excursion as an escape and restarts at a, which is
/// the walk of the split chain p̂^d. d = 0 disables truncation.
class TruncatedWalk {
 public:
  TruncatedWalk(const ChainFamily& family, LatticePoint a, std::uint64_t d,
                std::vector<LatticePoint> tracked = {});
  // Throws BudgetError when max_steps moves do not finish the excursion.
  Excursion next(std::uint64_t max_steps);
  std::uint32_t rotor(LatticePoint v) const;
  const std::unordered_map<std::uint64_t, std::uint32_t>& touched() const { return rotors_; }

 private:
  const ChainFamily& family_;
  LatticePoint a_;
  std::uint64_t d_;
  std::vector<LatticePoint> tracked_;
  std::unordered_map<std::uint64_t, std::uint32_t> rotors_;
};

std::uint64_t site_key(LatticePoint v);
LatticePoint site_of(std::uint64_t key);

struct TransfiniteState {
  // Radii at which the first n excursions agreed (radius, 2·radius).
  std::uint64_t radius = 0;
  std::vector<LatticePoint> tracked;
  std::vector<Excursion> excursions;
  // I[n]: escapes among the first n excursions; R[n] = n − I[n].
  std::vector<std::uint64_t> I;
  // r_ω materialized on the visited set; elsewhere the family's r0 holds.
  std::unordered_map<std::uint64_t, std::uint32_t> rotors;

  std::uint64_t escapes() const { return I.empty() ? 0 : I.back(); }
  std::uint64_t R(std::size_t n) const { return n - I.at(n); }
  std::uint32_t rotor(const ChainFamily& family, LatticePoint v) const;
};

/// First n excursions of the transfinite rotor walk from a. The walk is run
/// truncated at d0, 2d0, 4d0, …; the result is accepted once two consecutive
/// radii give identical excursion records (verdicts, tracked visits, and
/// lengths of the excursions that return). Throws UndecidedError at d_max.
TransfiniteState transfinite_run(const ChainFamily& family, LatticePoint a, std::uint64_t n,
                                 const EscapePolicy& policy = {},
                                 std::vector<LatticePoint> tracked = {});

struct EscapeVerdict {
  bool escaped = false;
  std::uint64_t radius = 0;  // smaller of the two agreeing radii
};

/// Verdict for the first excursion from a.
EscapeVerdict detect_escape(const ChainFamily& family, LatticePoint a,
                            const EscapePolicy& policy = {});

/// R_n^d: hits of a1 before the n-th return to a0 for the rotor walk on the
/// split chain truncated at d, built through split_and_truncate.
std::uint64_t truncated_returns(const ChainFamily& family, LatticePoint a, unsigned d,
                                std::uint64_t n);
/// R_0^d, …, R_n^d from one walk.
std::vector<std::uint64_t> truncated_return_series(const ChainFamily& family, LatticePoint a,
                                                   unsigned d, std::uint64_t n);

/// P_{a0}(reach ∂B(d) before a1) on the split chain truncated at d.
Rational truncated_escape_prob(const ChainFamily& family, LatticePoint a, unsigned d);

/// Closed forms on the drifted line (ρ = 1/2): h_{b,c} for c < b, g_b, and
/// the constants K1 (with b, c sent to a) and K5, summed exactly.
Rational drifted_hitting_prob(std::int64_t v, std::int64_t b, std::int64_t c);
Rational drifted_expected_visits(std::int64_t v, std::int64_t b);
Rational drifted_k1(std::int64_t b, std::int64_t c);
Rational drifted_k5(std::int64_t b);

struct TransfiniteOptions {
  std::uint64_t excursions = 1000;
  EscapePolicy policy;
  // Theorem 8: checks start at this n (0 means the last one only) and allow
  // I_n/n to exceed the truncated escape probability by slack.
  std::uint64_t check_from = 0;
  Rational slack = make_rational(1, 20);
  unsigned escape_radius = 64;
  VerifyOptions verify;
};

/// Transfinite checks on the drifted line (6, 7) or any one-dimensional
/// family (8). Checkpoint t is the number of finished excursions.
///   6: |h(a)(n_b+n_c+m) − n_b| ≤ K1 with b, c sent to a, c < b
///   7: |g(a)m − n_b| ≤ K5
///   8: I_n/n ≤ P(reach ∂B(d) before a1) + slack
DiscrepancyReport verify_transfinite_theorem(int theorem, const ChainFamily& family,
                                             LatticePoint a, LatticePoint b, LatticePoint c,
                                             const TransfiniteOptions& opt = {});

/// "n,I_n,R_n,ratio"
std::string transfinite_csv(const TransfiniteState& s);

/// A finite chain whose sinks absorb particles, with rotors at the rest.
struct SinkSystem {
  MarkovChain chain;
  RotorMechanism mech;
  RotorConfig rotors;
  std::vector<std::uint64_t> particles;
};

/// Checks that every vertex reaches a sink; throws SetupError.
SinkSystem make_sink_system(MarkovChain chain, RotorMechanism mech, RotorConfig rotors,
                            std::vector<std::uint64_t> particles);

enum class FiringOrder { Sequential, Random };

struct RoutingResult {
  std::vector<std::uint64_t> particles;  // nonzero only at sinks
  RotorConfig rotors;
  std::vector<std::uint64_t> firings;
  bool operator==(const RoutingResult&) const = default;
};

/// Fires vertices holding particles until all sit at sinks. Sequential moves
/// one particle at a time to a sink, taking the lowest occupied vertex; Random
/// picks the vertex to fire uniformly among occupied ones.
RoutingResult abelian_route(const SinkSystem& sys, FiringOrder order, std::uint64_t seed = 0);

}  // namespace rotor
