#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rotor/chain.hpp"
#include "rotor/potentials.hpp"
#include "rotor/rotor.hpp"

namespace rotor {

enum class ConstantKind { K1, K2, K3, K4, K5, K6 };

const char* to_string(ConstantKind k);

/// One itemized contribution. Pair terms carry v; per-vertex extras such as
/// ½d(b) carry no v. Values already include every factor (½, d(u), p).
struct Summand {
  VertexId u;
  std::optional<VertexId> v;
  Rational value;
};

struct BoundConstant {
  ConstantKind kind = ConstantKind::K1;
  Rational lead;  // 1, max k or sup g
  std::vector<Summand> summands;
  Rational value;

  // Sum of the summands attached to each vertex.
  std::vector<Rational> per_vertex(std::size_t n) const;
};

BoundConstant constant_k1(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& h, VertexId b, VertexId c);
BoundConstant constant_k2(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& k, VertexId b);
BoundConstant constant_k3(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& h, VertexId b, VertexId c);
BoundConstant constant_k4(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& k, const PotentialVector& pi, VertexId b);
BoundConstant constant_k5(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& g, VertexId b);
// K6 weighs each support edge once; it does not depend on a mechanism.
BoundConstant constant_k6(const MarkovChain& chain, const PotentialVector& h, VertexId b,
                          VertexId c);

struct BoundInputs {
  const PotentialVector* h = nullptr;
  const PotentialVector* k = nullptr;
  const PotentialVector* pi = nullptr;
  const PotentialVector* g = nullptr;
  VertexId b = 0;
  VertexId c = 0;
};

/// Dispatches on kind; throws MissingValueError if a required potential is absent.
BoundConstant compute_constant(ConstantKind kind, const MarkovChain& chain,
                               const RotorMechanism& mech, const BoundInputs& in);

/// K_i(t): lead·1[x_t ≠ x_0] + Σ summands of u with r_t(u) ≠ r_0(u).
Rational time_dependent_constant(const BoundConstant& k, const WalkState& state,
                                 const RotorConfig& r0, VertexId x0);

/// Keeps K_i(t) current in O(1) per step.
class TimeDependentTracker {
 public:
  TimeDependentTracker(const BoundConstant& k, std::size_t n, const RotorConfig& r0, VertexId x0);
  // Call after the rotor at u changed from old_r to new_r.
  void rotor_changed(VertexId u, std::uint32_t old_r, std::uint32_t new_r);
  Rational value(VertexId x) const;

 private:
  Rational lead_;
  std::vector<Rational> per_vertex_;
  RotorConfig r0_;
  VertexId x0_;
  Rational active_;
};

enum class Surgery { None, RedirectBC, RedirectB };

struct Setup {
  VertexId a = 0;
  VertexId b = 0;
  VertexId c = 0;
  Surgery surgery = Surgery::None;
};

/// Surgery the given theorem requires.
Surgery required_surgery(int theorem);

struct Checkpoint {
  std::uint64_t t;
  Rational lhs;
  Rational rhs;
  bool ok;
  Rational worst_ratio;  // running max of lhs/rhs up to and including t
};

struct DiscrepancyReport {
  int theorem = 0;
  BoundConstant constant;
  std::vector<Checkpoint> checkpoints;
  Rational worst_ratio;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
};

struct VerifyOptions {
  // Compare against K_i(t) instead of K_i.
  bool time_dependent = false;
  // Record every step up to here, then geometrically; violations always.
  std::uint64_t dense_until = 10000;
  bool record = true;
};

/// Runs the rotor walk from setup.a for `horizon` steps on the surgered chain
/// and checks the multiplied-out bound of theorem 1–4 at every step:
///   1: |h(a)(n_b+n_c) − n_b| ≤ K1      2: |(k(a)+1)n_b − t| ≤ K2
///   3: |n_b e_bc − n_c e_cb| ≤ K3       4: |n_b − π(b)t| ≤ K4 π(b)
/// The mechanism and r0 refer to the original chain; redirected vertices get
/// the single successor a.
DiscrepancyReport verify_theorem(int theorem, const MarkovChain& chain,
                                 const RotorMechanism& mech, const RotorConfig& r0,
                                 const Setup& setup, std::uint64_t horizon,
                                 const VerifyOptions& opt = {});

/// Shared bookkeeping for reports built by other modules.
class ReportBuilder {
 public:
  ReportBuilder(DiscrepancyReport& report, const VerifyOptions& opt)
      : report_(report), opt_(opt) {}
  // Returns ok.
  bool add(std::uint64_t t, const Rational& lhs, const Rational& rhs, bool force_record = false);

 private:
  bool due(std::uint64_t t);
  DiscrepancyReport& report_;
  VerifyOptions opt_;
  std::uint64_t next_sparse_ = 0;
};

/// "t,lhs_num,lhs_den,rhs_num,rhs_den,ok,worst_ratio"
std::string emit_csv(const DiscrepancyReport& report);
std::string csv_row(const Checkpoint& c);

}  // namespace rotor
