#include "rotor/rotor.hpp"

#include <json.hpp>
#include <numeric>
#include <random>

#include "rotor/errors.hpp"

namespace rotor {

namespace {

std::uint64_t row_lcd(std::span<const Transition> row) {
  std::uint64_t d = 1;
  for (const auto& tr : row) d = std::lcm(d, tr.prob.get_den().get_ui());
  return d;
}

}  // namespace

RotorMechanism derive_mechanism(const MarkovChain& chain, const OrderingPolicy& policy) {
  RotorMechanism mech;
  mech.succ.resize(chain.size());
  std::mt19937_64 rng(policy.seed);
  for (VertexId u = 0; u < chain.size(); ++u) {
    auto it = policy.explicit_lists.find(u);
    if (it != policy.explicit_lists.end()) {
      mech.succ[u] = it->second;
      continue;
    }
    const auto row = chain.row(u);
    const std::uint64_t d = row_lcd(row);
    auto& out = mech.succ[u];
    out.reserve(d);
    for (const auto& tr : row) {
      Rational copies = tr.prob * Rational(BigInt(static_cast<unsigned long>(d)));
      out.insert(out.end(), copies.get_num().get_ui(), tr.target);
    }
    if (policy.kind == OrderKind::Shuffled)
      for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng() % i]);
  }
  check_mechanism(chain, mech);
  return mech;
}

void check_mechanism(const MarkovChain& chain, const RotorMechanism& mech) {
  if (mech.size() != chain.size())
    throw OrderingMismatchError("mechanism covers " + std::to_string(mech.size()) +
                                " vertices, chain has " + std::to_string(chain.size()));
  for (VertexId u = 0; u < chain.size(); ++u) {
    const auto& out = mech.succ[u];
    if (out.empty()) throw OrderingMismatchError("empty successor list at '" + chain.label(u) + "'");
    std::map<VertexId, std::uint64_t> count;
    for (auto v : out) ++count[v];
    const auto row = chain.row(u);
    bool ok = count.size() == row.size();
    for (const auto& tr : row) {
      if (!ok) break;
      auto c = count.find(tr.target);
      ok = c != count.end() && make_rational(static_cast<std::int64_t>(c->second),
                                             static_cast<std::int64_t>(out.size())) == tr.prob;
    }
    if (!ok)
      throw OrderingMismatchError("successor list of '" + chain.label(u) +
                                  "' does not match its transition row");
  }
}

WalkState start_walk(const RotorMechanism& mech, RotorConfig r0, VertexId x0) {
  if (r0.size() != mech.size()) throw SetupError("rotor configuration has the wrong size");
  if (x0 >= mech.size()) throw SetupError("start vertex out of range");
  for (VertexId u = 0; u < mech.size(); ++u)
    if (r0[u] >= mech.degree(u)) throw SetupError("rotor residue out of range");
  WalkState s;
  s.x = x0;
  s.rotor = std::move(r0);
  s.visits.assign(mech.size(), 0);
  return s;
}

Rational phi(const MarkovChain& chain, const RotorMechanism& mech, const PotentialVector& f,
             VertexId u, std::uint32_t rho) {
  const auto& out = mech.succ[u];
  const Rational fu = f.at(u);
  const Rational term = fu + laplacian(chain, f, u);
  Rational acc = 0;
  for (std::uint32_t i = 1; i <= rho; ++i) acc += term - f.at(out[i % out.size()]);
  return acc;
}

PotentialTracker::PotentialTracker(const MarkovChain& chain, const RotorMechanism& mech,
                                   PotentialVector f, const WalkState& initial)
    : chain_(&chain), mech_(&mech), f_(std::move(f)), x0_(initial.x), r0_(initial.rotor) {
  lap_.resize(chain.size());
  for (VertexId u = 0; u < chain.size(); ++u)
    if (f_.has(u)) lap_[u] = laplacian(chain, f_, u);
  phi_ = f_.at(x0_);
  for (VertexId u = 0; u < chain.size(); ++u)
    if (r0_[u] != 0) phi_ += rotor::phi(chain, mech, f_, u, r0_[u]);
  phi0_ = phi_;
}

void PotentialTracker::before_step(const WalkState& s) {
  const VertexId u = s.x;
  const auto& out = mech_->succ[u];
  std::uint32_t r = s.rotor[u] + 1;
  if (r == out.size()) r = 0;
  const VertexId next = out[r];
  lap_sum_ += lap_[u];
  // φ(u,·) gains f(u) − f(succ[r]) + Δf(u) on each increment; the wrap to 0
  // closes a full period, over which the increments sum to 0.
  const Rational& fu = f_.at(u);
  if (r == 0) {
    phi_ -= rotor::phi(*chain_, *mech_, f_, u, s.rotor[u]);
  } else {
    phi_ += fu - f_.at(next) + lap_[u];
  }
  phi_ += f_.at(next) - fu;
}

IdentitySides check_key_identity(const MarkovChain& chain, const RotorMechanism& mech,
                                 const PotentialTracker& tracker, const WalkState& state) {
  const auto& f = tracker.f();
  Rational rhs = f.at(state.x) - f.at(tracker.x0());
  for (VertexId u = 0; u < chain.size(); ++u) {
    const auto r0 = tracker.r0()[u];
    const auto rt = state.rotor[u];
    if (r0 != rt) rhs += phi(chain, mech, f, u, rt) - phi(chain, mech, f, u, r0);
  }
  return {tracker.laplacian_sum(), rhs};
}

std::optional<Period> detect_period(const RotorMechanism& mech, const RotorConfig& r0, VertexId x0,
                                    std::uint64_t max_steps) {
  struct Snap {
    VertexId x;
    RotorConfig r;
    bool operator==(const Snap&) const = default;
  };
  auto advance = [&](Snap& s) {
    const auto& out = mech.succ[s.x];
    std::uint32_t r = s.r[s.x] + 1;
    if (r == out.size()) r = 0;
    s.r[s.x] = r;
    s.x = out[r];
  };
  const Snap start{x0, r0};
  Snap tortoise = start, hare = start;
  advance(hare);
  std::uint64_t power = 1, lam = 1, used = 1;
  while (!(tortoise == hare)) {
    if (used >= max_steps) return std::nullopt;
    if (power == lam) {
      tortoise = hare;
      power *= 2;
      lam = 0;
    }
    advance(hare);
    ++lam;
    ++used;
  }
  tortoise = start;
  hare = start;
  for (std::uint64_t i = 0; i < lam; ++i) advance(hare);
  std::uint64_t mu = 0;
  while (!(tortoise == hare)) {
    advance(tortoise);
    advance(hare);
    ++mu;
  }
  return Period{mu, lam};
}

void write_trajectory_csv(std::ostream& out, const MarkovChain& chain, const RotorMechanism& mech,
                          WalkState state, std::uint64_t steps) {
  out << "t,x,rotor_at_x\n";
  for (std::uint64_t i = 0;; ++i) {
    out << state.t << ',' << chain.label(state.x) << ','
        << display_residue(state.rotor[state.x], mech.degree(state.x)) << '\n';
    if (i == steps) break;
    step(state, mech);
  }
}

std::string rotor_snapshot_json(const MarkovChain& chain, const RotorMechanism& mech,
                                const RotorConfig& r) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (VertexId u = 0; u < chain.size(); ++u)
    doc[chain.label(u)] = display_residue(r.at(u), mech.degree(u));
  return doc.dump(2) + "\n";
}

}  // namespace rotor
