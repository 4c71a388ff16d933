#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "rotor/errors.hpp"
#include "rotor/random_chain.hpp"
#include "rotor/rotor.hpp"

using namespace rotor;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

MarkovChain redirected_path() {
  std::vector<VertexId> bc{0, 3};
  return redirect_to(fx::path4(), bc, 1);
}

}  // namespace

TEST_CASE("derive_mechanism") {
  auto m = derive_mechanism(fx::two_cycle());
  CHECK(m.succ[0] == std::vector<VertexId>{1});
  auto p = derive_mechanism(fx::path4());
  CHECK(p.succ[1] == std::vector<VertexId>{0, 2});
  auto c = build_chain({{"u", "v", "w"},
                        {{"u", "v", 2, 3}, {"u", "w", 1, 3}, {"v", "u", 1, 1}, {"w", "u", 1, 1}},
                        {}});
  CHECK(derive_mechanism(c).succ[0] == std::vector<VertexId>{1, 1, 2});

  OrderingPolicy bad;
  bad.explicit_lists[0] = {1, 2, 2};
  CHECK_THROWS_AS(derive_mechanism(c, bad), OrderingMismatchError);
  OrderingPolicy doubled;
  doubled.explicit_lists[0] = {1, 2, 1, 1, 2, 1};
  CHECK(derive_mechanism(c, doubled).degree(0) == 6);
}

TEST_CASE("step rules") {
  auto c = fx::two_cycle();
  auto m = derive_mechanism(c);
  auto s = start_walk(m, {0, 0}, 0);
  std::vector<VertexId> xs;
  for (int i = 0; i < 6; ++i) {
    xs.push_back(s.x);
    step(s, m);
  }
  CHECK(xs == std::vector<VertexId>{0, 1, 0, 1, 0, 1});
  CHECK(s.rotor[0] == 0);

  auto p = fx::path4();
  auto pm = derive_mechanism(p);
  auto ps = start_walk(pm, {0, 0, 0, 0}, 1);
  step(ps, pm);
  CHECK(ps.x == 2);
  CHECK(ps.rotor[1] == 1);
}

TEST_CASE("run_until") {
  auto c = redirected_path();
  auto m = derive_mechanism(c);
  auto s = start_walk(m, {0, 0, 0, 0}, 1);
  auto why = run_until(
      s, m, [](const WalkState& w) { return w.visits[0] + w.visits[3] == 100; }, 1000000);
  CHECK(why == StopReason::Hit);
  CHECK(s.visits[0] + s.visits[3] == 100);

  auto z = start_walk(m, {0, 0, 0, 0}, 1);
  CHECK(run_until(z, m, [](const WalkState&) { return false; }, 0) == StopReason::Budget);
  CHECK(z.t == 0);
  CHECK(run_until(z, m, [](const WalkState&) { return false; }, 1000000) == StopReason::Budget);
  CHECK(z.t == 1000000);
  std::uint64_t total = 0;
  for (auto n : z.visits) total += n;
  CHECK(total == z.t);
}

TEST_CASE("key identity on the path") {
  auto c = redirected_path();
  auto m = derive_mechanism(c);
  auto h = solve_hitting_prob(c, 0, 3);
  auto s = start_walk(m, {0, 0, 0, 0}, 1);
  PotentialTracker tr(c, m, h, s);
  auto at0 = check_key_identity(c, m, tr, s);
  CHECK(at0.lhs == 0);
  CHECK(at0.rhs == 0);
  for (int i = 0; i < 50; ++i) {
    tr.before_step(s);
    step(s, m);
  }
  auto sides = check_key_identity(c, m, tr, s);
  CHECK(sides.lhs == sides.rhs);
  CHECK(sides.lhs == h[1] * Rational(s.visits[0] + s.visits[3]) - Rational(s.visits[0]));
  CHECK(tr.phi() - tr.phi0() == sides.lhs);

  PotentialVector k(PotentialKind::Arbitrary, std::vector<Rational>(4, q(5, 2)));
  auto s2 = start_walk(m, {0, 0, 0, 0}, 2);
  PotentialTracker tk(c, m, k, s2);
  for (int i = 0; i < 20; ++i) {
    tk.before_step(s2);
    step(s2, m);
    auto e = check_key_identity(c, m, tk, s2);
    CHECK(e.lhs == 0);
    CHECK(e.rhs == 0);
  }
}

TEST_CASE("key identity on random chains with shuffled orders") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    auto c = random_irreducible_chain(rng);
    OrderingPolicy pol{OrderKind::Shuffled, rng(), {}};
    auto m = derive_mechanism(c, pol);
    RotorConfig r0(c.size());
    for (VertexId u = 0; u < c.size(); ++u) r0[u] = static_cast<std::uint32_t>(rng() % m.degree(u));
    auto s = start_walk(m, r0, 0);
    PotentialTracker tr(c, m, random_potential(rng, c.size()), s);
    for (int t = 0; t < 300; ++t) {
      tr.before_step(s);
      step(s, m);
      auto e = check_key_identity(c, m, tr, s);
      REQUIRE(e.lhs == e.rhs);
      REQUIRE(tr.phi() - tr.phi0() == e.lhs);
    }
  }
}

TEST_CASE("emission counts match the row over every window of d visits") {
  std::mt19937_64 rng(9);
  auto c = random_irreducible_chain(rng);
  auto m = derive_mechanism(c, {OrderKind::Shuffled, 3, {}});
  auto s = start_walk(m, RotorConfig(c.size(), 0), 0);
  std::vector<std::vector<VertexId>> emitted(c.size());
  for (int t = 0; t < 20000; ++t) {
    auto u = s.x;
    step(s, m);
    emitted[u].push_back(s.x);
  }
  for (VertexId u = 0; u < c.size(); ++u) {
    const auto d = m.degree(u);
    const auto& e = emitted[u];
    for (std::size_t start = 0; start + d <= e.size(); start += 7) {
      for (const auto& tr : c.row(u)) {
        auto n = std::count(e.begin() + start, e.begin() + start + d, tr.target);
        CHECK(Rational(n) == tr.prob * d);
      }
    }
  }
}

TEST_CASE("detect_period") {
  auto m = derive_mechanism(fx::two_cycle());
  auto p = detect_period(m, {0, 0}, 0, 100);
  REQUIRE(p);
  CHECK(p->preperiod == 0);
  CHECK(p->period == 2);

  auto tm = derive_mechanism(fx::triangle());
  auto tp = detect_period(tm, {0, 0, 0}, 0, 10000);
  REQUIRE(tp);
  auto a = start_walk(tm, {0, 0, 0}, 0);
  for (std::uint64_t i = 0; i < tp->preperiod; ++i) step(a, tm);
  auto b = a;
  for (std::uint64_t i = 0; i < tp->period; ++i) step(b, tm);
  CHECK(a.x == b.x);
  CHECK(a.rotor == b.rotor);
  for (VertexId v = 0; v < 3; ++v) CHECK(b.visits[v] > 0);

  CHECK_FALSE(detect_period(tm, {0, 0, 0}, 0, 1));
}

TEST_CASE("trajectory and snapshot output") {
  auto c = fx::two_cycle();
  auto m = derive_mechanism(c);
  std::ostringstream os;
  write_trajectory_csv(os, c, m, start_walk(m, {0, 0}, 0), 2);
  CHECK(os.str() == "t,x,rotor_at_x\n0,a,1\n1,b,1\n2,a,1\n");
  auto pm = derive_mechanism(fx::path4());
  CHECK(rotor_snapshot_json(fx::path4(), pm, {0, 1, 0, 0}) ==
        "{\n  \"0\": 1,\n  \"1\": 1,\n  \"2\": 2,\n  \"3\": 1\n}\n");
}
