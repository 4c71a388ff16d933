#include "rotor/stack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rotor/errors.hpp"

namespace rotor {

namespace {

constexpr std::uint32_t kFree = static_cast<std::uint32_t>(-1);

struct Slot {
  std::uint32_t symbol;
  std::uint64_t m;         // occurrence number, 1-based
  std::uint64_t deadline;  // ⌈m d / k⌉
};

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

// Kuhn's algorithm from the position side; slots are indexed densely.
class HallMatcher {
 public:
  HallMatcher(std::uint64_t d, const std::vector<std::uint64_t>& k) : d_(d), k_(k) {
    first_.resize(k.size() + 1, 0);
    for (std::size_t i = 0; i < k.size(); ++i) first_[i + 1] = first_[i] + k[i];
    owner_.assign(first_.back(), kFree);
  }

  // Slots adjacent to position t (1-based), by deadline then symbol.
  std::vector<Slot> candidates(std::uint64_t t) const {
    std::vector<Slot> out;
    for (std::uint32_t i = 0; i < k_.size(); ++i) {
      const std::uint64_t k = k_[i];
      const std::uint64_t lo = (t - 1) * k / d_ + 1;
      const std::uint64_t hi = std::min(k, t * k / d_ + 1);
      for (std::uint64_t m = lo; m <= hi; ++m) out.push_back({i, m, ceil_div(m * d_, k)});
    }
    std::stable_sort(out.begin(), out.end(), [](const Slot& x, const Slot& y) {
      return x.deadline != y.deadline ? x.deadline < y.deadline : x.symbol < y.symbol;
    });
    return out;
  }

  std::uint64_t slot_index(const Slot& s) const { return first_[s.symbol] + s.m - 1; }

  // Iterative augmenting-path search rooted at position t.
  bool augment(std::uint64_t root, std::vector<std::uint64_t>& seen, std::uint64_t stamp,
               std::vector<std::uint64_t>& match_of_pos) {
    struct Frame {
      std::uint64_t pos;
      std::vector<Slot> cand;
      std::size_t next;
    };
    std::vector<Frame> stack;
    stack.push_back({root, candidates(root), 0});
    for (const auto& c : stack.back().cand) {
      const std::uint64_t slot = slot_index(c);
      if (owner_[slot] == kFree) {
        owner_[slot] = static_cast<std::uint32_t>(root);
        match_of_pos[root] = slot;
        return true;
      }
    }
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next == f.cand.size()) {
        stack.pop_back();
        continue;
      }
      const std::uint64_t slot = slot_index(f.cand[f.next++]);
      if (seen[slot] == stamp) continue;
      seen[slot] = stamp;
      const std::uint32_t holder = owner_[slot];
      if (holder == kFree) {
        // Flip the path: each frame takes the slot chosen from it.
        std::uint64_t s = slot;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          const std::uint64_t prev = match_of_pos[it->pos];
          match_of_pos[it->pos] = s;
          owner_[s] = static_cast<std::uint32_t>(it->pos);
          s = prev;
        }
        return true;
      }
      stack.push_back({holder, candidates(holder), 0});
    }
    return false;
  }

  std::vector<std::uint32_t> run() {
    const std::uint64_t none = static_cast<std::uint64_t>(-1);
    std::vector<std::uint64_t> match_of_pos(d_ + 1, none);
    std::vector<std::uint64_t> seen(owner_.size(), 0);
    for (std::uint64_t t = 1; t <= d_; ++t)
      if (!augment(t, seen, t, match_of_pos))
        throw MatchingFailure("no perfect matching at position " + std::to_string(t));
    std::vector<std::uint32_t> word(d_);
    for (std::uint64_t t = 1; t <= d_; ++t) {
      const std::uint64_t s = match_of_pos[t];
      const auto it = std::upper_bound(first_.begin(), first_.end(), s);
      word[t - 1] = static_cast<std::uint32_t>(it - first_.begin() - 1);
    }
    return word;
  }

 private:
  std::uint64_t d_;
  std::vector<std::uint64_t> k_;
  std::vector<std::uint64_t> first_;
  std::vector<std::uint32_t> owner_;
};

}  // namespace

LowDiscrepancySequence::LowDiscrepancySequence(std::vector<Rational> p,
                                               std::vector<std::uint32_t> period)
    : p_(std::move(p)), period_(std::move(period)), positions_(p_.size()) {
  for (std::uint64_t j = 0; j < period_.size(); ++j) positions_.at(period_[j]).push_back(j + 1);
}

std::uint64_t LowDiscrepancySequence::count(std::uint32_t i, std::uint64_t n) const {
  const auto& pos = positions_.at(i);
  const std::uint64_t d = period_.size();
  return (n / d) * pos.size() +
         static_cast<std::uint64_t>(std::upper_bound(pos.begin(), pos.end(), n % d) - pos.begin());
}

LowDiscrepancySequence low_discrepancy_sequence(const std::vector<Rational>& p,
                                                std::uint64_t max_period) {
  if (p.empty()) throw NotNormalizedError("empty probability vector");
  Rational sum = 0;
  BigInt lcd = 1;
  for (const auto& x : p) {
    if (x <= 0 || x > 1) throw NotNormalizedError("probability " + x.get_str() + " outside (0,1]");
    sum += x;
    mpz_lcm(lcd.get_mpz_t(), lcd.get_mpz_t(), x.get_den().get_mpz_t());
  }
  if (sum != 1) throw NotNormalizedError("probabilities sum to " + sum.get_str());
  if (lcd > BigInt(static_cast<unsigned long>(max_period)))
    throw PeriodTooLargeError("period " + lcd.get_str() + " exceeds the cap " +
                              std::to_string(max_period));
  const std::uint64_t d = lcd.get_ui();
  std::vector<std::uint64_t> k;
  for (const auto& x : p) k.push_back(Rational(x * Rational(lcd)).get_num().get_ui());

  HallMatcher matcher(d, k);
  auto word = matcher.run();

  // |p_i t − count_i(t)| ≤ 1 over the whole period, checked as |k_i t − d·count| ≤ d.
  std::vector<std::uint64_t> cnt(p.size(), 0);
  for (std::uint64_t t = 1; t <= d; ++t) {
    ++cnt[word[t - 1]];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto a = static_cast<long double>(k[i]) * t;
      const auto b = static_cast<long double>(cnt[i]) * d;
      if (std::fabs(a - b) > static_cast<long double>(d))
        throw MatchingFailure("prefix bound fails at t=" + std::to_string(t));
    }
  }
  for (std::size_t i = 0; i < p.size(); ++i)
    if (cnt[i] != k[i]) throw MatchingFailure("period does not balance");
  return LowDiscrepancySequence(p, std::move(word));
}

std::vector<Rational> approximate_distribution(const std::vector<long double>& p,
                                               std::uint64_t denominator) {
  if (p.empty() || denominator < p.size())
    throw NotNormalizedError("denominator too small for the distribution");
  long double total = 0;
  for (auto x : p) {
    if (!(x > 0)) throw NotNormalizedError("non-positive probability");
    total += x;
  }
  if (std::fabs(total - 1.0L) > 1e-12L) throw NotNormalizedError("probabilities do not sum to 1");
  std::vector<std::uint64_t> units(p.size());
  std::vector<std::pair<long double, std::size_t>> rem;
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double scaled = p[i] * static_cast<long double>(denominator);
    units[i] = static_cast<std::uint64_t>(std::floor(scaled));
    used += units[i];
    rem.push_back({scaled - std::floor(scaled), i});
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t j = 0; used < denominator; ++j, ++used) ++units[rem[j % rem.size()].second];
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (units[i] > 0) continue;
    auto big = std::max_element(units.begin(), units.end()) - units.begin();
    --units[big];
    units[i] = 1;
  }
  std::vector<Rational> out;
  for (auto u : units)
    out.push_back(make_rational(static_cast<std::int64_t>(u), static_cast<std::int64_t>(denominator)));
  return out;
}

StackMechanism build_stack_mechanism(const MarkovChain& chain, std::uint64_t max_period) {
  StackMechanism mech;
  for (VertexId u = 0; u < chain.size(); ++u) {
    std::vector<VertexId> targets;
    std::vector<Rational> p;
    for (const auto& tr : chain.row(u)) {
      targets.push_back(tr.target);
      p.push_back(tr.prob);
    }
    mech.targets.push_back(std::move(targets));
    mech.seq.push_back(low_discrepancy_sequence(p, max_period));
  }
  return mech;
}

RotorMechanism to_rotor_mechanism(const StackMechanism& mech) {
  RotorMechanism rm;
  rm.succ.resize(mech.size());
  for (VertexId u = 0; u < mech.size(); ++u) {
    const std::uint64_t d = mech.seq[u].period_length();
    auto& out = rm.succ[u];
    out.resize(d);
    // Residue i is reached on visits n ≡ i (mod d) and must emit u^(n).
    for (std::uint64_t i = 0; i < d; ++i) out[i] = mech.successor(u, i == 0 ? d : i);
  }
  return rm;
}

WalkState start_stack_walk(const StackMechanism& mech, VertexId x0) {
  if (x0 >= mech.size()) throw SetupError("start vertex out of range");
  WalkState s;
  s.x = x0;
  s.visits.assign(mech.size(), 0);
  return s;
}

Rational discrepancy_D(const MarkovChain& chain, const StackMechanism& mech, VertexId u,
                       VertexId v, std::uint64_t n) {
  const auto& targets = mech.targets.at(u);
  Rational out = -Rational(BigInt(static_cast<unsigned long>(n))) * chain.prob(u, v);
  for (std::uint32_t i = 0; i < targets.size(); ++i)
    if (targets[i] == v) out += Rational(BigInt(static_cast<unsigned long>(mech.seq[u].count(i, n))));
  return out;
}

Rational stack_identity_rhs(const MarkovChain& chain, const StackMechanism& mech,
                            const PotentialVector& f, VertexId x0, const WalkState& s) {
  Rational rhs = f.at(s.x) - f.at(x0);
  for (VertexId u = 0; u < chain.size(); ++u) {
    const std::uint64_t n = s.visits[u];
    if (n == 0) continue;
    const Rational shift = f.at(u) + laplacian(chain, f, u);
    const auto& targets = mech.targets[u];
    for (std::uint32_t i = 0; i < targets.size(); ++i) {
      const VertexId v = targets[i];
      const Rational d = Rational(BigInt(static_cast<unsigned long>(mech.seq[u].count(i, n)))) -
                         Rational(BigInt(static_cast<unsigned long>(n))) * chain.prob(u, v);
      if (d != 0) rhs += d * (shift - f.at(v));
    }
  }
  return rhs;
}

StackReport verify_stack_theorem(const MarkovChain& chain, const StackMechanism& mech,
                                 VertexId a, VertexId b, VertexId c, std::uint64_t horizon,
                                 const StackVerifyOptions& opt) {
  if (std::max({a, b, c}) >= chain.size() || mech.size() != chain.size())
    throw SetupError("vertex or mechanism out of range");
  if (b == c || a == b || a == c) throw SetupError("a, b, c must be distinct");
  for (VertexId u : {b, c})
    if (chain.prob(u, a) != 1 || mech.targets[u] != std::vector<VertexId>{a})
      throw SetupError("'" + chain.label(u) + "' must step to a with probability 1");

  StackReport out;
  auto h = solve_hitting_prob(chain, b, c);
  out.report.theorem = 11;
  out.report.constant = constant_k6(chain, h, b, c);
  std::vector<Rational> lap(chain.size());
  for (VertexId u = 0; u < chain.size(); ++u) lap[u] = laplacian(chain, h, u);

  const Rational ha = h.at(a);
  const Rational k6 = out.report.constant.value;
  WalkState s = start_stack_walk(mech, a);
  ReportBuilder builder(out.report, opt.verify);
  Rational lap_sum = 0;
  for (;;) {
    Rational lhs = rabs(ha * Rational(s.visits[b] + s.visits[c]) - Rational(s.visits[b]));
    builder.add(s.t, lhs, k6, s.t == horizon);
    if (opt.identity_stride && s.t % opt.identity_stride == 0) {
      ++out.identity_checks;
      if (lap_sum != stack_identity_rhs(chain, mech, h, a, s)) ++out.identity_failures;
    }
    if (s.t == horizon) break;
    lap_sum += lap[s.x];
    stack_step(s, mech);
  }
  return out;
}

std::string export_sequence(const LowDiscrepancySequence& seq, std::uint64_t periods) {
  std::string out;
  for (std::uint64_t r = 0; r < periods; ++r) {
    for (std::uint64_t j = 0; j < seq.period_length(); ++j) {
      if (j) out += ' ';
      out += std::to_string(seq.period()[j] + 1);
    }
    out += '\n';
  }
  return out;
}

}  // namespace rotor
