#include "rotor/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "rotor/bounds.hpp"
#include "rotor/chain.hpp"
#include "rotor/errors.hpp"
#include "rotor/lattice.hpp"
#include "rotor/potentials.hpp"
#include "rotor/ppm.hpp"
#include "rotor/random_chain.hpp"
#include "rotor/rotor.hpp"
#include "rotor/stack.hpp"
#include "rotor/transfinite.hpp"

namespace rotor::cli {

namespace {

struct Usage : CLI::App {
  RunConfig cfg;
  CLI::App* solve;
  CLI::App* run;
  CLI::App* verify;
  CLI::App* z2;
  CLI::App* transfinite;
  CLI::App* stack;
  CLI::App* render;

  Usage() : CLI::App("Rotor walks, stack walks and their discrepancy bounds", "rotorwalk") {
    require_subcommand(1);
    option_defaults()->always_capture_default();
    solve = add_subcommand("solve", "exact hitting probabilities, times, stationary law, visits");
    run = add_subcommand("run", "rotor walk trajectory as CSV");
    verify = add_subcommand("verify", "check a discrepancy bound along a rotor or stack walk");
    z2 = add_subcommand("z2", "hitting experiment on the square lattice");
    transfinite = add_subcommand("transfinite", "transfinite rotor walk on an infinite family");
    stack = add_subcommand("stack", "low discrepancy sequences and the stack walk bound");
    render = add_subcommand("render", "PPM image of an initial lattice configuration");

    for (auto* s : {solve, run, verify, stack})
      s->add_option("--chain", cfg.chain_path, "chain JSON")->check(CLI::ExistingFile);
    for (auto* s : {run, verify}) {
      s->add_option("--order", cfg.order, "successor order")->check(CLI::IsMember({"id", "shuffled"}));
      s->add_option("--r0", cfg.r0, "initial rotors")->check(CLI::IsMember({"zero", "random"}));
    }
    for (auto* s : {solve, run, verify, stack, z2, transfinite}) {
      s->add_option("--seed", cfg.seed, "seed for every random choice");
      s->add_option("--csv", cfg.csv_out, "write the CSV here instead of stdout");
    }
    for (auto* s : {verify, stack, z2, transfinite}) {
      s->add_option("--a", cfg.a, "start vertex");
      s->add_option("--b", cfg.b, "target b");
      s->add_option("--c", cfg.c, "target c");
    }
    for (auto* s : {verify, stack}) {
      s->add_option("--horizon", cfg.horizon, "steps to check");
      s->add_option("--random", cfg.random, "run a seeded suite of this many random chains");
    }

    solve->add_option("--what", cfg.what, "h, k, pi, g or e")
        ->check(CLI::IsMember({"h", "k", "pi", "g", "e"}));
    solve->add_option("--b", cfg.b, "target b");
    solve->add_option("--c", cfg.c, "target c");

    run->add_option("--start", cfg.start, "start vertex");
    run->add_option("--steps", cfg.horizon, "number of steps");
    run->add_option("--snapshot", cfg.snapshot_out, "final rotors as JSON");

    verify->add_option("--theorem", cfg.theorem, "1, 2, 3, 4 or 11")
        ->required()
        ->check(CLI::IsMember({1, 2, 3, 4, 11}));
    verify->add_flag("--time-dependent", cfg.time_dependent, "compare against K(t)");
    verify->add_option("--orders", cfg.orders, "orderings per random chain")->check(CLI::Range(1u, 1000u));

    z2->add_option("--hits", cfg.hits, "stop at n_b + n_c = hits");
    z2->add_option("--max-steps", cfg.max_steps, "step budget");

    transfinite->add_option("--family", cfg.family, "line, drifted, z2-east or z2-sectors")
        ->check(CLI::IsMember({"line", "drifted", "z2-east", "z2-sectors"}));
    transfinite->add_option("--n", cfg.excursions, "excursions");
    transfinite->add_option("--theorem", cfg.theorem, "6, 7 or 8")->check(CLI::IsMember({6, 7, 8}));
    transfinite->add_option("--d0", cfg.d0, "first truncation radius")->check(CLI::PositiveNumber);
    transfinite->add_option("--dmax", cfg.d_max, "largest truncation radius");
    transfinite->add_option("--max-steps", cfg.max_steps, "steps per truncation level");

    stack->add_option("--probs", cfg.probs, "comma separated rationals");
    stack->add_option("--periods", cfg.periods, "periods to print");

    render->add_option("--config", cfg.config, "sectors or east")
        ->check(CLI::IsMember({"sectors", "east"}));
    for (auto* s : {z2, transfinite, render}) {
      s->add_option("--render", cfg.render_out, "PPM output");
      s->add_option("--box", cfg.box, "half width R of the box (−R,R]²")->check(CLI::NonNegativeNumber);
    }
    render->add_option("--out", cfg.render_out, "PPM output");
    render->add_option("--radius", cfg.box, "half width R of the box (−R,R]²")->check(CLI::NonNegativeNumber);
  }
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
  if (!f) throw UsageError("cannot write " + path);
}

VertexId vertex(const MarkovChain& chain, const std::string& label, VertexId fallback,
                const char* flag) {
  if (label.empty()) return fallback;
  auto v = chain.find(label);
  if (!v) throw UsageError(std::string(flag) + ": unknown vertex " + label);
  return *v;
}

MarkovChain load(const RunConfig& cfg) {
  if (cfg.chain_path.empty()) throw UsageError("--chain is required");
  return build_chain(load_chain_spec(cfg.chain_path));
}

RotorMechanism mechanism(const MarkovChain& chain, const RunConfig& cfg) {
  OrderingPolicy p;
  if (cfg.order == "shuffled") p = {OrderKind::Shuffled, cfg.seed, {}};
  return derive_mechanism(chain, p);
}

RotorConfig initial_rotors(const RotorMechanism& mech, const RunConfig& cfg) {
  RotorConfig r0(mech.size(), 0);
  if (cfg.r0 == "random") {
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    for (VertexId u = 0; u < mech.size(); ++u) r0[u] = static_cast<std::uint32_t>(rng() % mech.degree(u));
  }
  return r0;
}

int report_violation(const DiscrepancyReport& r, std::ostream& err) {
  if (r.violations == 0) return 0;
  for (const auto& c : r.checkpoints)
    if (!c.ok) {
      err << "violation: " << csv_row(c);
      break;
    }
  return 1;
}

void summary(const DiscrepancyReport& r, std::ostream& err) {
  err << "theorem " << r.theorem << ": " << to_string(r.constant.kind) << " = "
      << to_fraction_string(r.constant.value) << ", checked " << r.checked << ", violations "
      << r.violations << ", worst ratio " << to_fraction_string(r.worst_ratio) << "\n";
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const auto chain = load(cfg);
  const VertexId b = vertex(chain, cfg.b, 0, "--b");
  const VertexId c = vertex(chain, cfg.c, static_cast<VertexId>(chain.size() - 1), "--c");
  std::ostringstream s;
  if (cfg.what == "e") {
    s << "b,c,escape\n"
      << chain.label(b) << "," << chain.label(c) << "," << to_fraction_string(escape_prob(chain, b, c))
      << "\n";
  } else {
    PotentialVector f;
    if (cfg.what == "h") f = solve_hitting_prob(chain, b, c);
    else if (cfg.what == "k") f = solve_hitting_time(chain, b);
    else if (cfg.what == "pi") f = solve_stationary(chain);
    else f = expected_visits(chain, b);
    s << "vertex," << cfg.what << "\n";
    for (VertexId v = 0; v < chain.size(); ++v)
      s << chain.label(v) << "," << (f.has(v) ? to_fraction_string(f[v]) : "") << "\n";
  }
  emit(cfg.csv_out, s.str(), out);
  return 0;
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
  const auto chain = load(cfg);
  const auto mech = mechanism(chain, cfg);
  const VertexId x0 = vertex(chain, cfg.start, 0, "--start");
  auto state = start_walk(mech, initial_rotors(mech, cfg), x0);
  std::ostringstream s;
  write_trajectory_csv(s, chain, mech, state, cfg.horizon);
  emit(cfg.csv_out, s.str(), out);
  if (!cfg.snapshot_out.empty()) {
    for (std::uint64_t i = 0; i < cfg.horizon; ++i) step(state, mech);
    emit(cfg.snapshot_out, rotor_snapshot_json(chain, mech, state.rotor), out);
  }
  return 0;
}

// Three distinct vertices drawn from rng.
Setup random_setup(std::mt19937_64& rng, std::size_t n, int theorem) {
  Setup s;
  s.b = static_cast<VertexId>(rng() % n);
  do s.a = static_cast<VertexId>(rng() % n); while (s.a == s.b);
  do s.c = static_cast<VertexId>(rng() % n); while (s.c == s.b || s.c == s.a);
  s.surgery = theorem == 11 ? Surgery::RedirectBC : required_surgery(theorem);
  return s;
}

int cmd_verify_random(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::mt19937_64 rng(cfg.seed);
  std::ostringstream s;
  s << "chain,order,vertices,a,b,c,constant,checked,violations,worst_ratio\n";
  std::uint64_t bad = 0;
  std::string first_bad;
  for (std::uint64_t i = 0; i < cfg.random; ++i) {
    const auto chain = random_irreducible_chain(rng);
    const unsigned orders = cfg.theorem == 11 ? 1 : cfg.orders;
    for (unsigned o = 0; o < orders; ++o) {
      const Setup st = random_setup(rng, chain.size(), cfg.theorem);
      DiscrepancyReport r;
      if (cfg.theorem == 11) {
        const std::vector<VertexId> bc{st.b, st.c};
        const auto red = redirect_to(chain, bc, st.a);
        StackVerifyOptions so;
        so.verify.record = false;
        so.identity_stride = 0;
        r = verify_stack_theorem(red, build_stack_mechanism(red), st.a, st.b, st.c, cfg.horizon, so)
                .report;
      } else {
        OrderingPolicy p;
        if (o > 0) p = {OrderKind::Shuffled, rng(), {}};
        const auto mech = derive_mechanism(chain, p);
        RotorConfig r0(chain.size(), 0);
        if (o > 0)
          for (VertexId u = 0; u < chain.size(); ++u)
            r0[u] = static_cast<std::uint32_t>(rng() % mech.degree(u));
        VerifyOptions vo;
        vo.time_dependent = cfg.time_dependent;
        vo.record = false;
        r = verify_theorem(cfg.theorem, chain, mech, r0, st, cfg.horizon, vo);
      }
      std::ostringstream row;
      row << i << "," << o << "," << chain.size() << "," << st.a << "," << st.b << "," << st.c << ","
          << to_fraction_string(r.constant.value) << "," << r.checked << "," << r.violations << ","
          << to_fraction_string(r.worst_ratio) << "\n";
      s << row.str();
      if (r.violations > 0 && bad++ == 0) first_bad = row.str();
    }
  }
  emit(cfg.csv_out, s.str(), out);
  err << "theorem " << cfg.theorem << ": " << cfg.random << " random chains, " << bad
      << " with violations\n";
  if (bad > 0) {
    err << "violation: " << first_bad;
    return 1;
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.random > 0) return cmd_verify_random(cfg, out, err);
  const auto chain = load(cfg);
  const auto last = static_cast<VertexId>(chain.size() - 1);
  Setup st;
  st.b = vertex(chain, cfg.b, 0, "--b");
  st.a = vertex(chain, cfg.a, chain.size() > 1 ? 1 : 0, "--a");
  st.c = vertex(chain, cfg.c, last, "--c");
  DiscrepancyReport r;
  if (cfg.theorem == 11) {
    const std::vector<VertexId> bc{st.b, st.c};
    const auto red = redirect_to(chain, bc, st.a);
    StackVerifyOptions so;
    const auto sr = verify_stack_theorem(red, build_stack_mechanism(red), st.a, st.b, st.c,
                                         cfg.horizon, so);
    r = sr.report;
    if (sr.identity_failures > 0) {
      emit(cfg.csv_out, emit_csv(r), out);
      err << "identity failed at " << sr.identity_failures << " of " << sr.identity_checks
          << " checks\n";
      return 1;
    }
  } else {
    st.surgery = required_surgery(cfg.theorem);
    const auto mech = mechanism(chain, cfg);
    VerifyOptions vo;
    vo.time_dependent = cfg.time_dependent;
    r = verify_theorem(cfg.theorem, chain, mech, initial_rotors(mech, cfg), st, cfg.horizon, vo);
  }
  emit(cfg.csv_out, emit_csv(r), out);
  summary(r, err);
  return report_violation(r, err);
}

int cmd_z2(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const LatticePoint a = cfg.a.empty() ? LatticePoint{0, 0} : parse_point(cfg.a);
  const LatticePoint b = cfg.b.empty() ? LatticePoint{1, 1} : parse_point(cfg.b);
  const LatticePoint c = cfg.c.empty() ? LatticePoint{0, 0} : parse_point(cfg.c);
  PotentialKernel pk;
  Z2Options opt;
  opt.max_steps = cfg.max_steps;
  const auto e = run_z2_experiment(pk, a, b, c, cfg.hits, opt);
  emit(cfg.csv_out, z2_csv(e), out);
  if (!cfg.render_out.empty()) {
    const std::int64_t r = cfg.box > 0 ? cfg.box : static_cast<std::int64_t>(std::max<std::uint64_t>(e.max_layer, 1));
    emit(cfg.render_out, render_ppm([&](LatticePoint p) { return e.rotors.at(p); }, layer_box(r)), out);
  }
  err << std::setprecision(6) << "h(a) = " << static_cast<double>(e.h_a) << ", C = "
      << static_cast<double>(e.fitted_C) << ", C' = " << static_cast<double>(e.fitted_Cprime)
      << ", steps " << e.steps << ", max layer " << e.max_layer << ", visits between a "
      << e.max_visits_between_a << ", identity error " << static_cast<double>(e.identity_error)
      << "\n";
  if (!e.layers_ok || e.max_visits_between_a > 4 || e.identity_error > 1e-8L) {
    err << "violation: layer audit or key identity failed\n";
    return 1;
  }
  return 0;
}

int cmd_transfinite(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto family = make_family(cfg.family);
  auto point = [&](const std::string& s, LatticePoint fallback, const char* flag) {
    if (s.empty()) return fallback;
    try {
      return family->parse(s);
    } catch (const Error& ex) {
      throw UsageError(std::string(flag) + ": " + ex.what());
    }
  };
  const LatticePoint a = point(cfg.a, {0, 0}, "--a");
  EscapePolicy policy{cfg.d0, cfg.d_max, cfg.max_steps};
  if (cfg.theorem == 0) {
    const auto s = transfinite_run(*family, a, cfg.excursions, policy);
    emit(cfg.csv_out, transfinite_csv(s), out);
    if (!cfg.render_out.empty()) {
      if (!family->planar()) throw UsageError("--render: family " + cfg.family + " is not planar");
      const std::int64_t r = cfg.box > 0 ? cfg.box : 16;
      emit(cfg.render_out,
           render_ppm([&](LatticePoint p) { return s.rotor(*family, p); }, layer_box(r)), out);
    }
    err << "escapes " << s.escapes() << " of " << cfg.excursions << ", radius " << s.radius << "\n";
    return 0;
  }
  if (!cfg.render_out.empty()) throw UsageError("--render: only without --theorem");
  TransfiniteOptions opt;
  opt.excursions = cfg.excursions;
  opt.policy = policy;
  const LatticePoint b = point(cfg.b, a + LatticePoint{1, 0}, "--b");
  const LatticePoint c = point(cfg.c, a - LatticePoint{1, 0}, "--c");
  const auto r = verify_transfinite_theorem(cfg.theorem, *family, a, b, c, opt);
  emit(cfg.csv_out, emit_csv(r), out);
  summary(r, err);
  return report_violation(r, err);
}

std::vector<Rational> parse_probs(const std::string& text) {
  std::vector<Rational> p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      Rational q(item);
      q.canonicalize();
      p.push_back(q);
    } catch (const std::invalid_argument&) {
      throw UsageError("--probs: not a rational: " + item);
    }
  }
  if (p.empty()) throw UsageError("--probs: empty");
  return p;
}

int cmd_stack(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.probs.empty()) {
    const auto seq = low_discrepancy_sequence(parse_probs(cfg.probs));
    emit(cfg.csv_out, export_sequence(seq, cfg.periods), out);
    return 0;
  }
  RunConfig c = cfg;
  c.theorem = 11;
  return cmd_verify(c, out, err);
}

int cmd_render(const RunConfig& cfg, std::ostream& out) {
  const auto family = make_family(cfg.config == "east" ? "z2-east" : "z2-sectors");
  const std::int64_t r = cfg.box > 0 ? cfg.box : 20;
  emit(cfg.render_out,
       render_ppm([&](LatticePoint p) { return family->initial_rotor(p); }, layer_box(r)), out);
  return 0;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  Usage app;
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    RunConfig h;
    h.command = "help";
    h.help = app.help();
    return h;
  } catch (const CLI::CallForAllHelp&) {
    RunConfig h;
    h.command = "help";
    h.help = app.help("", CLI::AppFormatMode::All);
    return h;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  RunConfig cfg = app.cfg;
  for (auto* s : app.get_subcommands()) cfg.command = s->get_name();
  const bool needs_chain = cfg.command == "solve" || cfg.command == "run" ||
                           (cfg.command == "verify" && cfg.random == 0) ||
                           (cfg.command == "stack" && cfg.random == 0 && cfg.probs.empty());
  if (needs_chain && cfg.chain_path.empty()) throw UsageError("--chain is required");
  if (cfg.command == "stack" && cfg.random > 0) cfg.theorem = 11;
  if (cfg.command == "transfinite" && cfg.d0 > cfg.d_max)
    throw UsageError("--dmax: smaller than --d0");
  return cfg;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "help") {
      out << cfg.help;
      return 0;
    }
    if (cfg.command == "solve") return cmd_solve(cfg, out);
    if (cfg.command == "run") return cmd_run(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    if (cfg.command == "z2") return cmd_z2(cfg, out, err);
    if (cfg.command == "transfinite") return cmd_transfinite(cfg, out, err);
    if (cfg.command == "stack") return cmd_stack(cfg, out, err);
    if (cfg.command == "render") return cmd_render(cfg, out);
    throw UsageError("unknown command " + cfg.command);
  } catch (const UndecidedError& e) {
    err << "undecided: " << e.what() << "\n";
    return 3;
  } catch (const BudgetError& e) {
    err << "budget exhausted: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }
  return execute(cfg, out, err);
}

}  // namespace rotor::cli
