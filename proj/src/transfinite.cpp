#include "rotor/transfinite.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <sstream>

#include "rotor/errors.hpp"
#include "rotor/potentials.hpp"

namespace rotor {

namespace {

std::uint64_t uabs(std::int64_t v) { return v < 0 ? static_cast<std::uint64_t>(-v) : v; }

class IntegerLine : public ChainFamily {
 public:
  std::string name() const override { return "line"; }
  std::uint32_t degree(LatticePoint) const override { return 2; }
  LatticePoint successor(LatticePoint v, std::uint32_t i) const override {
    return {i == 0 ? v.x - 1 : v.x + 1, 0};
  }
  std::uint32_t initial_rotor(LatticePoint) const override { return 0; }
  std::uint64_t distance(LatticePoint u, LatticePoint v) const override { return uabs(u.x - v.x); }
};

class DriftedLine : public ChainFamily {
 public:
  std::string name() const override { return "drifted"; }
  std::uint32_t degree(LatticePoint) const override { return 3; }
  LatticePoint successor(LatticePoint v, std::uint32_t i) const override {
    return {i == 0 ? v.x - 1 : v.x + 1, 0};
  }
  std::uint32_t initial_rotor(LatticePoint) const override { return 0; }
  std::uint64_t distance(LatticePoint u, LatticePoint v) const override { return uabs(u.x - v.x); }
};

class Lattice : public ChainFamily {
 public:
  explicit Lattice(bool sectors) : sectors_(sectors) {}
  std::string name() const override { return sectors_ ? "z2-sectors" : "z2-east"; }
  std::uint32_t degree(LatticePoint) const override { return 4; }
  LatticePoint successor(LatticePoint v, std::uint32_t i) const override {
    return z2_successor(v, i);
  }
  std::uint32_t initial_rotor(LatticePoint v) const override {
    return sectors_ ? z2_initial_rotor(v) : 0;
  }
  std::uint64_t distance(LatticePoint u, LatticePoint v) const override {
    return uabs(u.x - v.x) + uabs(u.y - v.y);
  }
  bool planar() const override { return true; }

 private:
  bool sectors_;
};

class FiniteFamily : public ChainFamily {
 public:
  FiniteFamily(MarkovChain chain, RotorMechanism mech, RotorConfig r0)
      : chain_(std::move(chain)), mech_(std::move(mech)), r0_(std::move(r0)) {
    check_mechanism(chain_, mech_);
    if (r0_.size() != chain_.size()) throw SetupError("rotor configuration has the wrong size");
  }
  std::string name() const override { return "finite"; }
  std::uint32_t degree(LatticePoint v) const override { return mech_.degree(id(v)); }
  LatticePoint successor(LatticePoint v, std::uint32_t i) const override {
    return {mech_.succ[id(v)][i], 0};
  }
  std::uint32_t initial_rotor(LatticePoint v) const override { return r0_[id(v)]; }
  std::uint64_t distance(LatticePoint u, LatticePoint v) const override {
    auto it = dist_.find(id(v));
    if (it == dist_.end()) {
      // Distance to v along the support, through the reversed chain.
      std::vector<std::vector<VertexId>> into(chain_.size());
      for (VertexId w = 0; w < chain_.size(); ++w)
        for (const auto& tr : chain_.row(w)) into[tr.target].push_back(w);
      std::vector<std::uint64_t> d(chain_.size(), kFar);
      std::deque<VertexId> queue{id(v)};
      d[id(v)] = 0;
      while (!queue.empty()) {
        const VertexId w = queue.front();
        queue.pop_front();
        for (VertexId p : into[w])
          if (d[p] == kFar) {
            d[p] = d[w] + 1;
            queue.push_back(p);
          }
      }
      it = dist_.emplace(id(v), std::move(d)).first;
    }
    return it->second[id(u)];
  }
  std::string label(LatticePoint v) const override { return chain_.label(id(v)); }
  LatticePoint parse(const std::string& label) const override { return {chain_.id(label), 0}; }

 private:
  static constexpr std::uint64_t kFar = ~std::uint64_t{0};
  VertexId id(LatticePoint v) const {
    if (v.y != 0 || v.x < 0 || static_cast<std::uint64_t>(v.x) >= chain_.size())
      throw SetupError("site outside the finite chain");
    return static_cast<VertexId>(v.x);
  }
  MarkovChain chain_;
  RotorMechanism mech_;
  RotorConfig r0_;
  mutable std::map<VertexId, std::vector<std::uint64_t>> dist_;
};

class Redirected : public ChainFamily {
 public:
  Redirected(std::shared_ptr<const ChainFamily> base, std::vector<LatticePoint> sources,
             LatticePoint target)
      : base_(std::move(base)), sources_(std::move(sources)), target_(target) {
    for (auto s : sources_)
      if (s == target_) throw SelfRedirectError("a vertex cannot be sent to itself");
  }
  std::string name() const override { return base_->name() + "-redirected"; }
  std::uint32_t degree(LatticePoint v) const override { return source(v) ? 1 : base_->degree(v); }
  LatticePoint successor(LatticePoint v, std::uint32_t i) const override {
    return source(v) ? target_ : base_->successor(v, i);
  }
  std::uint32_t initial_rotor(LatticePoint v) const override {
    return source(v) ? 0 : base_->initial_rotor(v);
  }
  std::uint64_t distance(LatticePoint u, LatticePoint v) const override {
    return base_->distance(u, v);
  }
  bool planar() const override { return base_->planar(); }
  std::string label(LatticePoint v) const override { return base_->label(v); }
  LatticePoint parse(const std::string& label) const override { return base_->parse(label); }

 private:
  bool source(LatticePoint v) const {
    return std::find(sources_.begin(), sources_.end(), v) != sources_.end();
  }
  std::shared_ptr<const ChainFamily> base_;
  std::vector<LatticePoint> sources_;
  LatticePoint target_;
};

bool same_records(const std::vector<Excursion>& x, const std::vector<Excursion>& y) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].escaped != y[i].escaped || x[i].visits != y[i].visits) return false;
    if (!x[i].escaped && x[i].steps != y[i].steps) return false;
  }
  return true;
}

Rational pow2_inv(std::uint64_t k) {
  BigInt den = 1;
  den <<= static_cast<mp_bitcnt_t>(k);
  return Rational(BigInt(1), den);
}

// ½ Σ_{u ∈ [lo,hi] \ skip} Σ_i |f(u) − f(succ_i(u))| on the drifted line.
template <class F>
Rational drifted_gradient(F f, std::int64_t lo, std::int64_t hi,
                          const std::vector<std::int64_t>& skip) {
  Rational sum = 0;
  for (std::int64_t u = lo; u <= hi; ++u) {
    if (std::find(skip.begin(), skip.end(), u) != skip.end()) continue;
    sum += rabs(f(u) - f(u - 1)) + 2 * rabs(f(u) - f(u + 1));
  }
  return sum / 2;
}

constexpr std::int64_t kTailWindow = 16;

}  // namespace

std::string ChainFamily::label(LatticePoint v) const {
  return planar() ? std::to_string(v.x) + "," + std::to_string(v.y) : std::to_string(v.x);
}

LatticePoint ChainFamily::parse(const std::string& label) const {
  if (planar()) return parse_point(label);
  try {
    std::size_t used = 0;
    const long long x = std::stoll(label, &used);
    if (used == label.size()) return {x, 0};
  } catch (const std::logic_error&) {
  }
  throw UsageError("expected an integer site but got '" + label + "'");
}

RowOracle ChainFamily::oracle() const {
  return [this](const std::string& label) {
    const LatticePoint v = parse(label);
    const std::uint32_t d = degree(v);
    std::map<std::string, std::int64_t> count;
    for (std::uint32_t i = 0; i < d; ++i) ++count[this->label(successor(v, i))];
    std::vector<std::pair<std::string, Rational>> row;
    for (const auto& [target, k] : count) row.emplace_back(target, make_rational(k, d));
    return row;
  };
}

std::pair<RotorMechanism, RotorConfig> ChainFamily::mechanism_on(const SplitChain& split,
                                                                 LatticePoint a) const {
  const MarkovChain& ch = split.chain;
  RotorMechanism mech;
  mech.succ.resize(ch.size());
  RotorConfig r0(ch.size(), 0);
  std::vector<bool> boundary(ch.size(), false);
  for (auto v : split.boundary) boundary[v] = true;
  for (VertexId id = 0; id < ch.size(); ++id) {
    if (id == split.a1 || boundary[id]) {
      mech.succ[id] = {split.a0};
      continue;
    }
    const LatticePoint v = id == split.a0 ? a : parse(ch.label(id));
    for (std::uint32_t i = 0; i < degree(v); ++i) {
      const LatticePoint w = successor(v, i);
      mech.succ[id].push_back(w == a ? split.a1 : ch.id(label(w)));
    }
    r0[id] = initial_rotor(v);
  }
  check_mechanism(ch, mech);
  return {std::move(mech), std::move(r0)};
}

std::unique_ptr<ChainFamily> integer_line() { return std::make_unique<IntegerLine>(); }
std::unique_ptr<ChainFamily> drifted_line() { return std::make_unique<DriftedLine>(); }
std::unique_ptr<ChainFamily> lattice_all_east() { return std::make_unique<Lattice>(false); }
std::unique_ptr<ChainFamily> lattice_sectors() { return std::make_unique<Lattice>(true); }

std::unique_ptr<ChainFamily> finite_family(MarkovChain chain, RotorMechanism mech,
                                           RotorConfig r0) {
  return std::make_unique<FiniteFamily>(std::move(chain), std::move(mech), std::move(r0));
}

std::unique_ptr<ChainFamily> make_family(const std::string& name) {
  if (name == "line") return integer_line();
  if (name == "drifted") return drifted_line();
  if (name == "z2-east") return lattice_all_east();
  if (name == "z2-sectors") return lattice_sectors();
  throw UsageError("unknown family '" + name + "' (line, drifted, z2-east, z2-sectors)");
}

std::unique_ptr<ChainFamily> redirected(std::shared_ptr<const ChainFamily> base,
                                        std::vector<LatticePoint> sources, LatticePoint target) {
  return std::make_unique<Redirected>(std::move(base), std::move(sources), target);
}

std::uint64_t site_key(LatticePoint v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.x)) << 32) |
         static_cast<std::uint32_t>(v.y);
}

LatticePoint site_of(std::uint64_t key) {
  return {static_cast<std::int32_t>(key >> 32), static_cast<std::int32_t>(key & 0xffffffffu)};
}

TruncatedWalk::TruncatedWalk(const ChainFamily& family, LatticePoint a, std::uint64_t d,
                             std::vector<LatticePoint> tracked)
    : family_(family), a_(a), d_(d), tracked_(std::move(tracked)) {
  for (auto t : tracked_)
    if (t == a_) throw SetupError("tracked sites must differ from a");
}

std::uint32_t TruncatedWalk::rotor(LatticePoint v) const {
  auto it = rotors_.find(site_key(v));
  return it == rotors_.end() ? family_.initial_rotor(v) : it->second;
}

Excursion TruncatedWalk::next(std::uint64_t max_steps) {
  Excursion e;
  e.visits.assign(tracked_.size(), 0);
  LatticePoint x = a_;
  for (;;) {
    if (e.steps == max_steps)
      throw BudgetError("excursion unfinished after " + std::to_string(max_steps) + " steps");
    auto [it, fresh] = rotors_.try_emplace(site_key(x), 0);
    if (fresh) it->second = family_.initial_rotor(x);
    std::uint32_t r = it->second + 1;
    if (r >= family_.degree(x)) r = 0;
    it->second = r;
    x = family_.successor(x, r);
    ++e.steps;
    if (x == a_) return e;
    for (std::size_t i = 0; i < tracked_.size(); ++i)
      if (x == tracked_[i]) ++e.visits[i];
    if (d_ != 0 && family_.distance(x, a_) >= d_) {
      e.escaped = true;
      return e;
    }
  }
}

std::uint32_t TransfiniteState::rotor(const ChainFamily& family, LatticePoint v) const {
  auto it = rotors.find(site_key(v));
  return it == rotors.end() ? family.initial_rotor(v) : it->second;
}

TransfiniteState transfinite_run(const ChainFamily& family, LatticePoint a, std::uint64_t n,
                                 const EscapePolicy& policy, std::vector<LatticePoint> tracked) {
  if (policy.d0 == 0 || policy.d0 > policy.d_max) throw SetupError("bad radius schedule");
  std::vector<Excursion> prev;
  std::uint64_t prev_d = 0;
  for (std::uint64_t d = policy.d0; d <= policy.d_max; d *= 2) {
    TruncatedWalk walk(family, a, d, tracked);
    std::vector<Excursion> cur;
    cur.reserve(n);
    std::uint64_t used = 0;
    try {
      for (std::uint64_t i = 0; i < n; ++i) {
        cur.push_back(walk.next(policy.max_steps - used));
        used += cur.back().steps;
      }
    } catch (const BudgetError&) {
      throw UndecidedError("step budget exhausted at radius " + std::to_string(d) + " after " +
                           std::to_string(cur.size()) + " of " + std::to_string(n) +
                           " excursions");
    }
    if (prev_d != 0 && same_records(prev, cur)) {
      TransfiniteState s;
      s.radius = prev_d;
      s.tracked = std::move(tracked);
      s.I.assign(n + 1, 0);
      for (std::uint64_t i = 0; i < n; ++i) s.I[i + 1] = s.I[i] + (cur[i].escaped ? 1 : 0);
      s.excursions = std::move(cur);
      s.rotors = walk.touched();
      return s;
    }
    prev = std::move(cur);
    prev_d = d;
    if (d > policy.d_max / 2) break;
  }
  throw UndecidedError("excursion records still changing at radius " + std::to_string(prev_d));
}

EscapeVerdict detect_escape(const ChainFamily& family, LatticePoint a,
                            const EscapePolicy& policy) {
  const auto s = transfinite_run(family, a, 1, policy);
  return {s.excursions.front().escaped, s.radius};
}

std::vector<std::uint64_t> truncated_return_series(const ChainFamily& family, LatticePoint a,
                                                   unsigned d, std::uint64_t n) {
  const SplitChain split = split_and_truncate(family.oracle(), family.label(a), d);
  auto [mech, r0] = family.mechanism_on(split, a);
  WalkState s = start_walk(mech, std::move(r0), split.a0);
  std::vector<std::uint64_t> out{0};
  std::uint64_t hits = 0;
  while (out.size() <= n) {
    step(s, mech);
    if (s.x == split.a1) ++hits;
    if (s.x == split.a0) out.push_back(hits);
  }
  return out;
}

std::uint64_t truncated_returns(const ChainFamily& family, LatticePoint a, unsigned d,
                                std::uint64_t n) {
  return truncated_return_series(family, a, d, n).back();
}

Rational truncated_escape_prob(const ChainFamily& family, LatticePoint a, unsigned d) {
  const SplitChain split = split_and_truncate(family.oracle(), family.label(a), d);
  if (split.boundary.empty()) return 0;
  const VertexId target[] = {split.a1};
  return solve_hitting_prob(split.chain, split.boundary, target).at(split.a0);
}

Rational drifted_hitting_prob(std::int64_t v, std::int64_t b, std::int64_t c) {
  if (c >= b) throw SetupError("closed form needs c < b");
  if (v >= b) return pow2_inv(static_cast<std::uint64_t>(v - b));
  if (v <= c) return 0;
  // Gambler's ruin with ρ = 1/2.
  return (1 - pow2_inv(static_cast<std::uint64_t>(v - c))) /
         (1 - pow2_inv(static_cast<std::uint64_t>(b - c)));
}

Rational drifted_expected_visits(std::int64_t v, std::int64_t b) {
  // From b the walk comes back with probability 2/3, so g(b) = 3.
  return v <= b ? Rational(3) : Rational(3 * pow2_inv(static_cast<std::uint64_t>(v - b)));
}

Rational drifted_k1(std::int64_t b, std::int64_t c) {
  auto h = [&](std::int64_t v) { return drifted_hitting_prob(v, b, c); };
  // Below c−1 every term vanishes; beyond the window u = b+k adds 2^−k.
  return 1 + drifted_gradient(h, c - 1, b + kTailWindow, {b, c}) + pow2_inv(kTailWindow);
}

Rational drifted_k5(std::int64_t b) {
  auto g = [&](std::int64_t v) { return drifted_expected_visits(v, b); };
  // u = b+k adds 6·2^−k before halving, so the tail beyond the window is 3·2^−W.
  return 3 + (Rational(3) / 2 + drifted_gradient(g, b - 1, b + kTailWindow, {}) +
              3 * pow2_inv(kTailWindow));
}

DiscrepancyReport verify_transfinite_theorem(int theorem, const ChainFamily& family,
                                             LatticePoint a, LatticePoint b, LatticePoint c,
                                             const TransfiniteOptions& opt) {
  DiscrepancyReport report;
  report.theorem = theorem;
  ReportBuilder builder(report, opt.verify);
  const std::uint64_t n = opt.excursions;
  if (n == 0) throw SetupError("need at least one excursion");
  const std::shared_ptr<const ChainFamily> base(&family, [](const ChainFamily*) {});

  if (theorem == 6 || theorem == 7) {
    if (family.name() != "drifted")
      throw SetupError("theorems 6 and 7 are checked on the drifted line");
    if (a.y != 0 || b.y != 0 || c.y != 0) throw SetupError("sites must lie on the line");
  }
  switch (theorem) {
    case 6: {
      if (!(c.x < b.x)) throw SetupError("theorem 6 needs c < b");
      if (a == b || a == c) throw SetupError("a must differ from b and c");
      const auto fam = redirected(base, {b, c}, a);
      const auto s = transfinite_run(*fam, a, n, opt.policy, {b, c});
      const Rational ha = drifted_hitting_prob(a.x, b.x, c.x);
      report.constant.kind = ConstantKind::K1;
      report.constant.lead = 1;
      report.constant.value = drifted_k1(b.x, c.x);
      std::uint64_t nb = 0, nc = 0, m = 0;
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto& e = s.excursions[i];
        nb += e.visits[0];
        nc += e.visits[1];
        m += e.escaped ? 1 : 0;
        const Rational lhs = rabs(ha * Rational(nb + nc + m) - Rational(nb));
        builder.add(i + 1, lhs, report.constant.value, i + 1 == n);
      }
      return report;
    }
    case 7: {
      if (a == b) throw SetupError("a must differ from b");
      const auto s = transfinite_run(family, a, n, opt.policy, {b});
      const Rational ga = drifted_expected_visits(a.x, b.x);
      report.constant.kind = ConstantKind::K5;
      report.constant.lead = 3;
      report.constant.value = drifted_k5(b.x);
      std::uint64_t nb = 0, m = 0;
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto& e = s.excursions[i];
        nb += e.visits[0];
        m += e.escaped ? 1 : 0;
        const Rational lhs = rabs(ga * Rational(m) - Rational(nb));
        builder.add(i + 1, lhs, report.constant.value, i + 1 == n);
      }
      return report;
    }
    case 8: {
      const auto s = transfinite_run(family, a, n, opt.policy);
      const Rational esc = truncated_escape_prob(family, a, opt.escape_radius);
      report.constant.lead = esc;
      report.constant.value = esc + opt.slack;
      const std::uint64_t from = opt.check_from == 0 ? n : opt.check_from;
      for (std::uint64_t k = std::max<std::uint64_t>(from, 1); k <= n; ++k)
        builder.add(k, Rational(s.I[k]) / Rational(k), report.constant.value, k == n);
      return report;
    }
  }
  throw SetupError("no transfinite theorem with id " + std::to_string(theorem));
}

std::string transfinite_csv(const TransfiniteState& s) {
  std::ostringstream os;
  os << "n,I_n,R_n,ratio\n";
  for (std::size_t k = 1; k < s.I.size(); ++k)
    os << k << ',' << s.I[k] << ',' << s.R(k) << ','
       << to_fraction_string(Rational(s.I[k]) / Rational(k)) << '\n';
  return os.str();
}

SinkSystem make_sink_system(MarkovChain chain, RotorMechanism mech, RotorConfig rotors,
                            std::vector<std::uint64_t> particles) {
  const auto sinks = chain.sinks();
  if (sinks.empty()) throw SetupError("sink system without sinks");
  if (rotors.size() != chain.size() || particles.size() != chain.size())
    throw SetupError("rotor or particle vector has the wrong size");
  check_mechanism(chain, mech);
  const auto ok = reaches(chain, sinks);
  for (VertexId v = 0; v < chain.size(); ++v)
    if (!ok[v]) throw SetupError("vertex '" + chain.label(v) + "' cannot reach a sink");
  return {std::move(chain), std::move(mech), std::move(rotors), std::move(particles)};
}

RoutingResult abelian_route(const SinkSystem& sys, FiringOrder order, std::uint64_t seed) {
  const std::size_t n = sys.chain.size();
  RoutingResult res{sys.particles, sys.rotors, std::vector<std::uint64_t>(n, 0)};
  std::vector<bool> sink(n);
  for (VertexId v = 0; v < n; ++v) sink[v] = sys.chain.is_sink(v);
  auto fire = [&](VertexId v) {
    std::uint32_t r = res.rotors[v] + 1;
    if (r == sys.mech.degree(v)) r = 0;
    res.rotors[v] = r;
    --res.particles[v];
    ++res.firings[v];
    const VertexId w = sys.mech.succ[v][r];
    ++res.particles[w];
    return w;
  };

  if (order == FiringOrder::Sequential) {
    for (VertexId v = 0; v < n; ++v) {
      while (!sink[v] && res.particles[v] > 0) {
        VertexId x = v;
        while (!sink[x]) x = fire(x);
      }
    }
    return res;
  }

  std::mt19937_64 rng(seed);
  std::vector<VertexId> occupied;
  for (VertexId v = 0; v < n; ++v)
    if (!sink[v] && res.particles[v] > 0) occupied.push_back(v);
  while (!occupied.empty()) {
    const std::size_t k = rng() % occupied.size();
    const VertexId v = occupied[k];
    const VertexId w = fire(v);
    if (w == v) continue;
    if (res.particles[v] == 0) {
      occupied[k] = occupied.back();
      occupied.pop_back();
    }
    if (!sink[w] && res.particles[w] == 1) occupied.push_back(w);
  }
  return res;
}

}  // namespace rotor
