#include "rotor/bounds.hpp"

#include <algorithm>
#include <sstream>

#include "rotor/errors.hpp"

namespace rotor {

namespace {

const Rational kHalf = make_rational(1, 2);

Rational dp(const RotorMechanism& mech, VertexId u, const Rational& p) {
  return Rational(mech.degree(u)) * p;
}

Rational max_value(const PotentialVector& f, std::size_t n) {
  Rational m = f.at(0);
  for (VertexId v = 1; v < n; ++v) m = std::max(m, f.at(v));
  return m;
}

void finish(BoundConstant& k) {
  k.value = k.lead;
  for (const auto& s : k.summands) k.value += s.value;
}

// ½ Σ_{u ∉ skip, v} d(u)p(u,v)|f(u) − f(v) + shift|
void add_pair_terms(BoundConstant& k, const MarkovChain& chain, const RotorMechanism& mech,
                    const PotentialVector& f, const Rational& shift,
                    const std::vector<VertexId>& skip) {
  for (VertexId u = 0; u < chain.size(); ++u) {
    if (std::find(skip.begin(), skip.end(), u) != skip.end()) continue;
    for (const auto& tr : chain.row(u)) {
      Rational term = kHalf * dp(mech, u, tr.prob) * rabs(f.at(u) - f.at(tr.target) + shift);
      if (term != 0) k.summands.push_back({u, tr.target, std::move(term)});
    }
  }
}

}  // namespace

const char* to_string(ConstantKind k) {
  switch (k) {
    case ConstantKind::K1: return "K1";
    case ConstantKind::K2: return "K2";
    case ConstantKind::K3: return "K3";
    case ConstantKind::K4: return "K4";
    case ConstantKind::K5: return "K5";
    case ConstantKind::K6: return "K6";
  }
  return "?";
}

std::vector<Rational> BoundConstant::per_vertex(std::size_t n) const {
  std::vector<Rational> out(n);
  for (const auto& s : summands) out.at(s.u) += s.value;
  return out;
}

BoundConstant constant_k1(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& h, VertexId b, VertexId c) {
  BoundConstant k{ConstantKind::K1, 1, {}, 0};
  add_pair_terms(k, chain, mech, h, 0, {b, c});
  finish(k);
  return k;
}

BoundConstant constant_k2(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& kb, VertexId b) {
  BoundConstant k{ConstantKind::K2, max_value(kb, chain.size()), {}, 0};
  add_pair_terms(k, chain, mech, kb, -1, {b});
  finish(k);
  return k;
}

BoundConstant constant_k3(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& h, VertexId b, VertexId c) {
  BoundConstant k{ConstantKind::K3, 1, {}, 0};
  k.summands.push_back({b, std::nullopt, kHalf * Rational(mech.degree(b))});
  k.summands.push_back({c, std::nullopt, kHalf * Rational(mech.degree(c))});
  add_pair_terms(k, chain, mech, h, 0, {});
  finish(k);
  return k;
}

BoundConstant constant_k4(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& kb, const PotentialVector& pi, VertexId b) {
  BoundConstant k{ConstantKind::K4, max_value(kb, chain.size()), {}, 0};
  k.summands.push_back({b, std::nullopt, kHalf * Rational(mech.degree(b)) / pi.at(b)});
  add_pair_terms(k, chain, mech, kb, -1, {});
  finish(k);
  return k;
}

BoundConstant constant_k5(const MarkovChain& chain, const RotorMechanism& mech,
                          const PotentialVector& g, VertexId b) {
  BoundConstant k{ConstantKind::K5, max_value(g, chain.size()), {}, 0};
  k.summands.push_back({b, std::nullopt, kHalf * Rational(mech.degree(b))});
  add_pair_terms(k, chain, mech, g, 0, {});
  finish(k);
  return k;
}

BoundConstant constant_k6(const MarkovChain& chain, const PotentialVector& h, VertexId b,
                          VertexId c) {
  BoundConstant k{ConstantKind::K6, 1, {}, 0};
  for (VertexId u = 0; u < chain.size(); ++u) {
    if (u == b || u == c) continue;
    for (const auto& tr : chain.row(u)) {
      Rational term = rabs(h.at(u) - h.at(tr.target));
      if (term != 0) k.summands.push_back({u, tr.target, std::move(term)});
    }
  }
  finish(k);
  return k;
}

BoundConstant compute_constant(ConstantKind kind, const MarkovChain& chain,
                               const RotorMechanism& mech, const BoundInputs& in) {
  auto need = [](const PotentialVector* p, const char* name) -> const PotentialVector& {
    if (!p) throw MissingValueError(std::string("constant needs potential ") + name);
    return *p;
  };
  switch (kind) {
    case ConstantKind::K1: return constant_k1(chain, mech, need(in.h, "h"), in.b, in.c);
    case ConstantKind::K2: return constant_k2(chain, mech, need(in.k, "k"), in.b);
    case ConstantKind::K3: return constant_k3(chain, mech, need(in.h, "h"), in.b, in.c);
    case ConstantKind::K4:
      return constant_k4(chain, mech, need(in.k, "k"), need(in.pi, "pi"), in.b);
    case ConstantKind::K5: return constant_k5(chain, mech, need(in.g, "g"), in.b);
    case ConstantKind::K6: return constant_k6(chain, need(in.h, "h"), in.b, in.c);
  }
  throw SetupError("unknown constant kind");
}

Rational time_dependent_constant(const BoundConstant& k, const WalkState& state,
                                 const RotorConfig& r0, VertexId x0) {
  Rational out = state.x != x0 ? k.lead : Rational(0);
  for (const auto& s : k.summands)
    if (state.rotor.at(s.u) != r0.at(s.u)) out += s.value;
  return out;
}

TimeDependentTracker::TimeDependentTracker(const BoundConstant& k, std::size_t n,
                                           const RotorConfig& r0, VertexId x0)
    : lead_(k.lead), per_vertex_(k.per_vertex(n)), r0_(r0), x0_(x0), active_(0) {}

void TimeDependentTracker::rotor_changed(VertexId u, std::uint32_t old_r, std::uint32_t new_r) {
  const bool was = old_r != r0_[u];
  const bool is = new_r != r0_[u];
  if (was && !is) active_ -= per_vertex_[u];
  if (!was && is) active_ += per_vertex_[u];
}

Rational TimeDependentTracker::value(VertexId x) const {
  return x != x0_ ? Rational(active_ + lead_) : active_;
}

Surgery required_surgery(int theorem) {
  switch (theorem) {
    case 1: return Surgery::RedirectBC;
    case 2: return Surgery::RedirectB;
    case 3:
    case 4: return Surgery::None;
  }
  throw SetupError("no rotor theorem with id " + std::to_string(theorem));
}

bool ReportBuilder::due(std::uint64_t t) {
  if (t <= opt_.dense_until) return true;
  if (t < next_sparse_) return false;
  next_sparse_ = std::max(t + 1, t + t / 10);
  return true;
}

bool ReportBuilder::add(std::uint64_t t, const Rational& lhs, const Rational& rhs,
                        bool force_record) {
  const bool ok = lhs <= rhs;
  ++report_.checked;
  if (!ok) ++report_.violations;
  if (rhs > 0) {
    Rational ratio = lhs / rhs;
    if (ratio > report_.worst_ratio) report_.worst_ratio = std::move(ratio);
  } else if (lhs > 0 && report_.worst_ratio < lhs + 1) {
    // Positive discrepancy against a zero allowance: report it as large.
    report_.worst_ratio = lhs + 1;
  }
  const bool sample = due(t);
  if (opt_.record && (sample || !ok || force_record))
    report_.checkpoints.push_back({t, lhs, rhs, ok, report_.worst_ratio});
  return ok;
}

DiscrepancyReport verify_theorem(int theorem, const MarkovChain& chain,
                                 const RotorMechanism& mech, const RotorConfig& r0,
                                 const Setup& setup, std::uint64_t horizon,
                                 const VerifyOptions& opt) {
  if (setup.surgery != required_surgery(theorem))
    throw SetupError("theorem " + std::to_string(theorem) + " needs a different surgery");
  const VertexId a = setup.a, b = setup.b, c = setup.c;
  if (std::max({a, b, c}) >= chain.size()) throw SetupError("vertex out of range");
  if (theorem != 2 && b == c) throw SetupError("b and c must differ");
  if ((theorem == 1 && (a == b || a == c)) || (theorem == 2 && a == b))
    throw SetupError("a must differ from the redirected vertices; split it first");
  if (r0.size() != chain.size()) throw SetupError("rotor configuration has the wrong size");

  std::vector<VertexId> sources;
  if (setup.surgery == Surgery::RedirectBC) sources = {b, c};
  if (setup.surgery == Surgery::RedirectB) sources = {b};
  const MarkovChain work = sources.empty() ? chain : redirect_to(chain, sources, a);
  RotorMechanism m = mech;
  RotorConfig start = r0;
  for (auto s : sources) {
    m.succ[s] = {a};
    start[s] = 0;
  }
  check_mechanism(work, m);

  DiscrepancyReport report;
  report.theorem = theorem;
  Rational coef_b, coef_c, scale = 1;  // lhs = |coef_b n_b + coef_c n_c + coef_t t|
  Rational coef_t = 0;
  switch (theorem) {
    case 1: {
      auto h = solve_hitting_prob(work, b, c);
      report.constant = constant_k1(work, m, h, b, c);
      coef_b = h.at(a) - 1;
      coef_c = h.at(a);
      break;
    }
    case 2: {
      auto k = solve_hitting_time(work, b);
      report.constant = constant_k2(work, m, k, b);
      coef_b = k.at(a) + 1;
      coef_t = -1;
      break;
    }
    case 3: {
      auto h = solve_hitting_prob(work, b, c);
      report.constant = constant_k3(work, m, h, b, c);
      coef_b = -laplacian(work, h, b);
      coef_c = -laplacian(work, h, c);
      break;
    }
    case 4: {
      auto k = solve_hitting_time(work, b);
      auto pi = solve_stationary(work);
      report.constant = constant_k4(work, m, k, pi, b);
      coef_b = 1;
      coef_t = -pi.at(b);
      scale = pi.at(b);
      break;
    }
  }

  const Rational rhs_fixed = report.constant.value * scale;
  WalkState s = start_walk(m, start, a);
  std::optional<TimeDependentTracker> td;
  if (opt.time_dependent) td.emplace(report.constant, work.size(), start, a);
  ReportBuilder builder(report, opt);
  Rational lhs, rhs;
  for (;;) {
    lhs = coef_b * Rational(s.visits[b]);
    if (coef_c != 0) lhs += coef_c * Rational(s.visits[c]);
    if (coef_t != 0) lhs += coef_t * Rational(s.t);
    lhs = rabs(lhs);
    if (td) rhs = td->value(s.x) * scale;
    builder.add(s.t, lhs, td ? rhs : rhs_fixed, s.t == horizon);
    if (s.t == horizon) break;
    const VertexId u = s.x;
    const auto old_r = s.rotor[u];
    step(s, m);
    if (td) td->rotor_changed(u, old_r, s.rotor[u]);
  }
  return report;
}

std::string csv_row(const Checkpoint& c) {
  std::ostringstream os;
  os << c.t << ',' << c.lhs.get_num().get_str() << ',' << c.lhs.get_den().get_str() << ','
     << c.rhs.get_num().get_str() << ',' << c.rhs.get_den().get_str() << ','
     << (c.ok ? "true" : "false") << ',' << to_fraction_string(c.worst_ratio);
  return os.str();
}

std::string emit_csv(const DiscrepancyReport& report) {
  std::string out = "t,lhs_num,lhs_den,rhs_num,rhs_den,ok,worst_ratio\n";
  for (const auto& c : report.checkpoints) {
    out += csv_row(c);
    out += '\n';
  }
  return out;
}

}  // namespace rotor
