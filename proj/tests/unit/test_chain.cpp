#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "rotor/errors.hpp"
#include "rotor/potentials.hpp"
#include "rotor/random_chain.hpp"

using namespace rotor;

namespace {
Rational q(long n, long d = 1) { return make_rational(n, d); }
}  // namespace

TEST_CASE("build_chain validates rows") {
  CHECK(fx::two_cycle().size() == 2);
  CHECK(fx::path4().prob(1, 2) == q(1, 2));
  CHECK_THROWS_AS(build_chain({{"u", "v", "w"}, {{"u", "v", 1, 3}, {"u", "w", 1, 3}}, {}}),
                  RowSumError);
  CHECK_THROWS_AS(build_chain({{"u"}, {{"u", "u", -1, 1}}, {}}), NegativeProbError);
  CHECK_THROWS_AS(build_chain({{"u"}, {{"u", "zz", 1, 1}}, {}}), DanglingVertexError);
}

TEST_CASE("json round trip") {
  auto spec = to_chain_spec(fx::path4());
  auto again = build_chain(parse_chain_spec(to_json(spec)));
  CHECK(again.labels() == fx::path4().labels());
  CHECK(again.prob(2, 3) == q(1, 2));
  CHECK_THROWS_AS(parse_chain_spec("{\"vertices\":"), ChainSpecError);
}

TEST_CASE("redirect") {
  auto c = fx::path4();
  std::vector<VertexId> src{0, 3};
  auto r = redirect_to(c, src, 1);
  CHECK(r.prob(0, 1) == 1);
  CHECK(r.prob(3, 1) == 1);
  CHECK(r.prob(3, 2) == 0);
  CHECK(r.prob(2, 3) == q(1, 2));
  std::vector<VertexId> bad{1};
  CHECK_THROWS_AS(redirect_to(c, bad, 1), SelfRedirectError);

  auto t = fx::triangle();
  std::vector<VertexId> b{0};
  auto rt = redirect_to(t, b, 1);
  CHECK(rt.prob(0, 1) == 1);
  CHECK(rt.prob(2, 0) == q(1, 2));

  // Redirecting b and c does not change h.
  auto h0 = solve_hitting_prob(c, 0, 3);
  auto h1 = solve_hitting_prob(r, 0, 3);
  for (VertexId v = 0; v < 4; ++v) CHECK(h0[v] == h1[v]);
}

TEST_CASE("split") {
  auto s = split_and_truncate(fx::two_cycle(), 0, std::nullopt);
  CHECK(s.chain.size() == 3);
  CHECK(s.chain.prob(s.a0, 1) == 1);
  CHECK(s.chain.prob(1, s.a1) == 1);
  CHECK(s.chain.prob(s.a1, s.a0) == 1);

  RowOracle z = [](const std::string& l) {
    long v = std::stol(l);
    return std::vector<std::pair<std::string, Rational>>{{std::to_string(v - 1), q(1, 2)},
                                                        {std::to_string(v + 1), q(1, 2)}};
  };
  auto t = split_and_truncate(z, "0", 2);
  CHECK(t.chain.size() == 6);
  CHECK(t.chain.prob(t.chain.id("2"), t.a0) == 1);
  CHECK(t.chain.prob(t.chain.id("-2"), t.a0) == 1);
  CHECK(t.chain.prob(t.chain.id("1"), t.a1) == q(1, 2));
  CHECK(t.boundary.size() == 2);

  auto one = split_and_truncate(fx::path4(), 1, 1u);
  CHECK(one.chain.size() == 4);  // 0, 1#0, 2, 1#1
}

TEST_CASE("laplacian") {
  auto c = fx::path4();
  PotentialVector k1(PotentialKind::Arbitrary, std::vector<Rational>(4, q(7, 3)));
  for (VertexId u = 0; u < 4; ++u) CHECK(laplacian(c, k1, u) == 0);
  auto h = solve_hitting_prob(c, 0, 3);
  CHECK(laplacian(c, h, 1) == 0);
  auto k = solve_hitting_time(fx::two_cycle(), 1);
  CHECK(k[0] == 1);
  CHECK(laplacian(fx::two_cycle(), k, 1) == k[0]);
  PotentialVector partial(PotentialKind::Arbitrary, 4);
  partial.set(0, 1);
  CHECK_THROWS_AS(laplacian(c, partial, 0), MissingValueError);
}

TEST_CASE("hitting probabilities") {
  auto h = solve_hitting_prob(fx::path4(), 0, 3);
  CHECK(h[0] == 1);
  CHECK(h[1] == q(2, 3));
  CHECK(h[2] == q(1, 3));
  CHECK(h[3] == 0);
  CHECK(solve_hitting_prob(fx::triangle(), 0, 1)[2] == q(1, 2));
  auto iso = build_chain({{"s", "b", "c"},
                          {{"s", "s", 1, 1}, {"b", "c", 1, 1}, {"c", "b", 1, 1}},
                          {}});
  CHECK_THROWS_AS(solve_hitting_prob(iso, 1, 2), SingularSystemError);
}

TEST_CASE("hitting times") {
  CHECK(solve_hitting_time(fx::two_cycle(), 1)[0] == 1);
  auto k = solve_hitting_time(fx::path4(), 0);
  CHECK(k[1] == 5);
  CHECK(k[2] == 8);
  CHECK(k[3] == 9);
  auto cyc = build_chain({{"0", "1", "2"},
                          {{"0", "1", 1, 2}, {"0", "2", 1, 2}, {"1", "0", 1, 2},
                           {"1", "2", 1, 2}, {"2", "0", 1, 2}, {"2", "1", 1, 2}},
                          {}});
  auto kc = solve_hitting_time(cyc, 0);
  CHECK(kc[1] == kc[2]);
}

TEST_CASE("stationary") {
  auto p2 = solve_stationary(fx::two_cycle());
  CHECK(p2[0] == q(1, 2));
  auto pt = solve_stationary(fx::triangle());
  for (VertexId v = 0; v < 3; ++v) CHECK(pt[v] == q(1, 3));
  auto pl = solve_stationary(fx::lazy_pair());
  CHECK(pl[0] == q(1, 3));
  CHECK(pl[1] == q(2, 3));
  auto red = build_chain({{"a", "b"}, {{"a", "b", 1, 1}, {"b", "b", 1, 1}}, {}});
  CHECK_THROWS_AS(solve_stationary(red), ReducibleChainError);
}

TEST_CASE("escape probabilities") {
  CHECK(escape_prob(fx::triangle(), 0, 1) == q(3, 4));
  CHECK(escape_prob(fx::two_cycle(), 0, 1) == 1);
  std::mt19937_64 rng(11);
  RandomChainOptions opt;
  opt.min_vertices = opt.max_vertices = 6;
  for (int i = 0; i < 20; ++i) {
    auto c = random_irreducible_chain(rng, opt);
    auto pi = solve_stationary(c);
    CHECK(pi[0] * escape_prob(c, 0, 5) == pi[5] * escape_prob(c, 5, 0));
    auto h = solve_hitting_prob(c, 0, 5);
    CHECK(laplacian(c, h, 5) == escape_prob(c, 5, 0));
  }
}

TEST_CASE("expected visits") {
  auto one = build_chain({{"b", "s"}, {{"b", "s", 1, 1}}, {"s"}});
  CHECK(expected_visits(one, 0)[0] == 1);
  auto loop = build_chain({{"b", "s", "z"},
                           {{"b", "b", 1, 2}, {"b", "s", 1, 2}, {"z", "s", 1, 1}},
                           {"s"}});
  auto g = expected_visits(loop, 0);
  CHECK(g[0] == 2);
  CHECK(g[2] == 0);
  CHECK(laplacian(loop, g, 0) == -1);
  CHECK_THROWS_AS(expected_visits(fx::two_cycle(), 0), SingularSystemError);
}
