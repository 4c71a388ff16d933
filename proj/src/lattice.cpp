#include "rotor/lattice.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <mpfr.h>

#include "rotor/errors.hpp"

namespace rotor {

namespace {

constexpr std::array<LatticePoint, 4> kCompass = {{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

std::uint64_t uabs(std::int64_t v) { return v < 0 ? static_cast<std::uint64_t>(-v) : v; }

// Octant coordinates n ≥ j ≥ 0.
std::pair<std::uint64_t, std::uint64_t> octant(LatticePoint v) {
  std::uint64_t n = uabs(v.x), j = uabs(v.y);
  if (j > n) std::swap(n, j);
  return {n, j};
}

class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

}  // namespace

LatticePoint z2_successor(LatticePoint u, std::uint32_t i) { return u + kCompass[i % 4]; }

std::uint32_t z2_initial_rotor(LatticePoint v) {
  // With X = 2x−1, Y = 2y−1 the residue is the sector of (X,Y) split by the
  // diagonals, East owning its lower diagonal and so on anticlockwise.
  const std::int64_t X = 2 * v.x - 1, Y = 2 * v.y - 1;
  if (X > 0 && -X <= Y && Y < X) return 0;
  if (Y > 0 && -Y < X && X <= Y) return 1;
  if (X < 0 && X < Y && Y <= -X) return 2;
  return 3;
}

std::uint64_t layer_of(LatticePoint v) {
  const std::uint64_t lx = v.x > 0 ? static_cast<std::uint64_t>(v.x) : 1 + uabs(v.x);
  const std::uint64_t ly = v.y > 0 ? static_cast<std::uint64_t>(v.y) : 1 + uabs(v.y);
  return std::max(lx, ly);
}

PotentialKernel::PotentialKernel(unsigned max_radius, unsigned exact_radius)
    : max_radius_(std::max(max_radius, 1u)), exact_radius_(exact_radius) {
  value_ = {{0.0L}, {1.0L, 4.0L / static_cast<long double>(M_PIl)}};
  prev_ = {{0, 0}};
  cur_ = {{1, 0}, {0, 4}};
  exact_ = {prev_, cur_};
  diag_ = 1;
  rows_done_ = 1;
}

void PotentialKernel::ensure(unsigned radius) {
  radius = std::min(radius, max_radius_);
  while (rows_done_ < radius) {
    const unsigned n = rows_done_;
    std::vector<std::pair<Rational, Rational>> next(n + 2);
    // a(n+1,j) = 4a(n,j) − a(n−1,j) − a(n,j+1) − a(n,|j−1|)
    for (unsigned j = 0; j < n; ++j) {
      const auto& l = cur_[j + 1];
      const auto& r = cur_[j == 0 ? 1 : j - 1];
      next[j].first = 4 * cur_[j].first - prev_[j].first - l.first - r.first;
      next[j].second = 4 * cur_[j].second - prev_[j].second - l.second - r.second;
    }
    // a(n+1,n) = 2a(n,n) − a(n,n−1); the diagonal is (4/π)Σ 1/(2k−1).
    next[n].first = 2 * cur_[n].first - cur_[n - 1].first;
    next[n].second = 2 * cur_[n].second - cur_[n - 1].second;
    diag_ += make_rational(1, 2 * static_cast<std::int64_t>(n + 1) - 1);
    next[n + 1] = {0, 4 * diag_};

    const mpfr_prec_t prec = 3 * static_cast<mpfr_prec_t>(n + 1) + 200;
    Mpfr inv_pi(prec), q(prec), r(prec);
    mpfr_const_pi(inv_pi.get(), MPFR_RNDN);
    mpfr_ui_div(inv_pi.get(), 1, inv_pi.get(), MPFR_RNDN);
    std::vector<long double> vals(n + 2);
    for (unsigned j = 0; j < n + 2; ++j) {
      mpfr_set_q(q.get(), next[j].first.get_mpq_t(), MPFR_RNDN);
      mpfr_mul_q(r.get(), inv_pi.get(), next[j].second.get_mpq_t(), MPFR_RNDN);
      mpfr_add(q.get(), q.get(), r.get(), MPFR_RNDN);
      vals[j] = mpfr_get_ld(q.get(), MPFR_RNDN);
    }
    value_.push_back(std::move(vals));
    if (n + 1 <= exact_radius_) exact_.push_back(next);
    prev_ = std::move(cur_);
    cur_ = std::move(next);
    ++rows_done_;
  }
}

long double PotentialKernel::operator()(LatticePoint v) {
  const auto [n, j] = octant(v);
  if (n > max_radius_) return asymptotic(v);
  ensure(static_cast<unsigned>(n));
  return value_[n][j];
}

std::optional<std::pair<Rational, Rational>> PotentialKernel::exact(LatticePoint v) {
  const auto [n, j] = octant(v);
  if (n > exact_radius_ || n > max_radius_) return std::nullopt;
  ensure(static_cast<unsigned>(n));
  return exact_[n][j];
}

long double PotentialKernel::kappa() {
  constexpr long double gamma = 0.577215664901532860606512090082402431L;
  return (2 * gamma + 3 * std::log(2.0L)) / static_cast<long double>(M_PIl);
}

long double PotentialKernel::asymptotic(LatticePoint v) {
  const long double x = static_cast<long double>(v.x), y = static_cast<long double>(v.y);
  const long double r2 = x * x + y * y;
  if (r2 == 0) return 0;
  const long double pi = M_PIl;
  const long double c4 = (x * x * x * x - 6 * x * x * y * y + y * y * y * y) / (r2 * r2);
  const long double c8 = 2 * c4 * c4 - 1;
  return std::log(r2) / pi + kappa() - c4 / (6 * pi * r2) -
         (18 * c4 + 25 * c8) / (120 * pi * r2 * r2);
}

AsymptoticFit fit_asymptotic_constant(PotentialKernel& pk, double rmin, double rmax) {
  const auto top = static_cast<unsigned>(std::ceil(rmax));
  if (top > pk.max_radius()) throw SetupError("fit window exceeds the kernel table");
  pk.ensure(top);
  std::array<std::array<long double, 4>, 4> ata{};
  std::array<long double, 4> atb{};
  struct Row {
    std::array<long double, 4> basis;
    long double y;
  };
  std::vector<Row> rows;
  const long double pi = M_PIl;
  for (unsigned n = 1; n <= top; ++n) {
    for (unsigned j = 0; j <= n; ++j) {
      const long double x = n, y = j, r2 = x * x + y * y;
      if (r2 < rmin * rmin || r2 > rmax * rmax) continue;
      const long double c4 = (x * x * x * x - 6 * x * x * y * y + y * y * y * y) / (r2 * r2);
      const long double c8 = 2 * c4 * c4 - 1;
      Row row{{1, c4 / r2, c4 / (r2 * r2), c8 / (r2 * r2)},
              pk({static_cast<std::int64_t>(n), static_cast<std::int64_t>(j)}) -
                  std::log(r2) / pi};
      for (int p = 0; p < 4; ++p) {
        atb[p] += row.basis[p] * row.y;
        for (int q = 0; q < 4; ++q) ata[p][q] += row.basis[p] * row.basis[q];
      }
      rows.push_back(row);
    }
  }
  if (rows.size() < 4) throw SetupError("fit window holds too few lattice points");
  // Gaussian elimination with partial pivoting on the 4×4 normal equations.
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(ata[r][col]) > std::fabs(ata[piv][col])) piv = r;
    std::swap(ata[piv], ata[col]);
    std::swap(atb[piv], atb[col]);
    for (int r = col + 1; r < 4; ++r) {
      const long double f = ata[r][col] / ata[col][col];
      for (int q = col; q < 4; ++q) ata[r][q] -= f * ata[col][q];
      atb[r] -= f * atb[col];
    }
  }
  std::array<long double, 4> sol{};
  for (int r = 3; r >= 0; --r) {
    long double s = atb[r];
    for (int q = r + 1; q < 4; ++q) s -= ata[r][q] * sol[q];
    sol[r] = s / ata[r][r];
  }
  AsymptoticFit fit{sol[0], sol[1], sol[2], sol[3], 0, rows.size()};
  for (const auto& row : rows) {
    long double model = 0;
    for (int p = 0; p < 4; ++p) model += sol[p] * row.basis[p];
    fit.max_residual = std::max(fit.max_residual, std::fabs(model - row.y));
  }
  return fit;
}

long double z2_hitting_prob(PotentialKernel& pk, LatticePoint v, LatticePoint b, LatticePoint c) {
  if (b == c) throw SetupError("b and c must differ");
  if (v == b) return 1;
  if (v == c) return 0;
  return 0.5L + (pk(v - c) - pk(v - b)) / (2 * pk(b - c));
}

std::vector<long double> lattice_gradient_sums(PotentialKernel& pk, LatticePoint b,
                                               LatticePoint c, unsigned kmax) {
  // Edges inside B(k) but not B(k−1) are those with an endpoint in layer k.
  std::vector<long double> out(kmax + 1, 0.0L);
  long double total = 0;
  auto h = [&](LatticePoint v) { return z2_hitting_prob(pk, v, b, c); };
  for (unsigned k = 1; k <= kmax; ++k) {
    const std::int64_t lo = 1 - static_cast<std::int64_t>(k), hi = k;
    for (std::int64_t x = lo; x <= hi; ++x) {
      for (std::int64_t y = lo; y <= hi; ++y) {
        const LatticePoint u{x, y};
        if (layer_of(u) != k) continue;
        // Each edge is taken at its endpoint of larger layer; within a layer
        // only the East and North edges are taken.
        for (std::uint32_t i = 0; i < 4; ++i) {
          const LatticePoint v = z2_successor(u, i);
          const std::uint64_t lv = layer_of(v);
          if (lv > k) continue;
          if (lv == k && i >= 2) continue;
          total += std::fabs(h(u) - h(v));
        }
      }
    }
    out[k] = total;
  }
  return out;
}

std::uint32_t Z2Rotors::at(LatticePoint v) const {
  if (a_out && v == a) return *a_out;
  const std::uint8_t* r = grid.find(v);
  return r && *r != 0xff ? *r : z2_initial_rotor(v);
}

namespace {

// Site index: lattice points are themselves; the split copy of a is apart.
struct Walker {
  PotentialKernel& pk;
  LatticePoint a, b, c;
  bool split;
  // Current position; on_out means the split copy of a.
  LatticePoint x;
  bool on_out;
  DenseGrid<std::uint8_t> rotor{0xff};
  std::uint8_t out_rotor;

  std::uint32_t rotor_at(LatticePoint v) {
    std::uint8_t& r = rotor[v];
    if (r == 0xff) r = static_cast<std::uint8_t>(z2_initial_rotor(v));
    return r;
  }

  // One step of the rotor walk.
  void step() {
    if (!on_out && (x == b || x == c)) {
      // Degree one: the forced move to a (to its outgoing copy if split).
      if (split) on_out = true;
      x = a;
      return;
    }
    std::uint8_t* r;
    if (on_out) {
      r = &out_rotor;
    } else {
      rotor_at(x);
      r = &rotor[x];
    }
    *r = static_cast<std::uint8_t>((*r + 1) % 4);
    x = z2_successor(x, *r);
    on_out = false;
  }
};

}  // namespace

Z2Experiment run_z2_experiment(PotentialKernel& pk, LatticePoint a, LatticePoint b,
                               LatticePoint c, std::uint64_t target, const Z2Options& opt) {
  if (b == c) throw SetupError("b and c must differ");
  if (target == 0) throw SetupError("target hit count must be positive");
  Z2Experiment e;
  e.a = a;
  e.b = b;
  e.c = c;
  e.target = target;

  const bool split = a == b || a == c;
  Walker w{pk, a, b, c, split, a, split, DenseGrid<std::uint8_t>(0xff),
           static_cast<std::uint8_t>(z2_initial_rotor(a))};

  // h on lattice sites, cached; the outgoing copy averages its neighbours.
  DenseGrid<long double> hcache(std::numeric_limits<long double>::quiet_NaN());
  auto h = [&](LatticePoint v) {
    long double& slot = hcache[v];
    if (std::isnan(slot)) slot = z2_hitting_prob(pk, v, b, c);
    return slot;
  };
  long double h_out = 0;
  if (split) {
    for (std::uint32_t i = 0; i < 4; ++i) h_out += h(z2_successor(a, i));
    h_out /= 4;
  }
  e.h_a = split ? h_out : h(a);

  // Key identity: Σ_u φ(u, r_t(u)) − φ(u, r_0(u)) kept as one running sum.
  long double phi = 0;
  const long double h_x0 = e.h_a;

  // Layer audits. Epochs run between consecutive visits to a.
  const std::uint64_t layer_a = layer_of(a);
  std::uint64_t max_layer = layer_a;
  std::uint64_t a_visits_since_entry = 1;  // the start counts as a visit
  std::uint64_t epoch = 0;
  DenseGrid<std::uint64_t> epoch_of(0);
  DenseGrid<std::uint32_t> visits_in_epoch(0);

  auto at_a = [&]() { return split ? w.on_out : w.x == a; };
  auto arrive = [&]() {
    if (at_a()) {
      ++a_visits_since_entry;
      ++epoch;
    }
    if (w.on_out) return;  // the copy of a is visited once per epoch
    std::uint64_t& ep = epoch_of[w.x];
    std::uint32_t& cnt = visits_in_epoch[w.x];
    if (ep != epoch) {
      ep = epoch;
      cnt = 0;
    }
    e.max_visits_between_a = std::max<std::uint64_t>(e.max_visits_between_a, ++cnt);
    const std::uint64_t L = layer_of(w.x);
    if (L > max_layer) {
      if (L >= layer_a + 2 && a_visits_since_entry == 0) e.layers_ok = false;
      max_layer = L;
      a_visits_since_entry = 0;
    }
  };
  arrive();
  a_visits_since_entry = 1;

  std::uint64_t n_b = 0, n_c = 0;
  while (n_b + n_c < target) {
    if (e.steps == opt.max_steps)
      throw BudgetError("step budget exhausted after " + std::to_string(e.steps) + " steps with " +
                        std::to_string(n_b + n_c) + " of " + std::to_string(target) + " hits");
    const bool forced = !w.on_out && (w.x == b || w.x == c);
    const LatticePoint from = w.x;
    if (!forced) {
      // φ gains h(u) − h(u^(r)) for the rotor position r about to be used.
      const long double hu = w.on_out ? h_out : h(w.x);
      const std::uint32_t r_next = ((w.on_out ? w.out_rotor : w.rotor_at(w.x)) + 1) % 4;
      phi += hu - h(z2_successor(w.x, r_next));
    }
    w.step();
    ++e.steps;
    arrive();
    if (!forced) continue;

    // A hit at b or c, recorded once the forced step back to a is taken.
    (from == b ? n_b : n_c) += 1;
    const std::uint64_t n = n_b + n_c;
    const long double disc = std::fabs(e.h_a * static_cast<long double>(n) - n_b);
    const long double scaled = n > 1 ? disc / std::log(static_cast<long double>(n)) : 0;
    e.series.push_back({n, n_b, e.steps, disc, scaled});
    if (n >= opt.fit_from) e.fitted_C = std::max(e.fitted_C, scaled);
    const long double n3 = static_cast<long double>(n) * n * n;
    e.fitted_Cprime = std::max(e.fitted_Cprime, static_cast<long double>(e.steps) / n3);

    if (opt.check_identity) {
      // Only b and c carry Δh, so Σ_{s<t} Δh(x_s) = h(a)(n_b+n_c) − n_b.
      const long double lhs = e.h_a * static_cast<long double>(n) - n_b;
      const long double rhs = (w.on_out ? h_out : h(w.x)) - h_x0 + phi;
      const long double err = std::fabs(lhs - rhs) / static_cast<long double>(e.steps);
      e.identity_error = std::max(e.identity_error, err);
    }
  }
  e.max_layer = max_layer;
  e.rotors.grid = std::move(w.rotor);
  if (split) e.rotors.a_out = w.out_rotor;
  e.rotors.a = a;
  e.rotors.b = b;
  e.rotors.c = c;
  return e;
}

std::string z2_csv(const Z2Experiment& e) {
  std::ostringstream os;
  os.precision(17);
  os << "n,hits_b,t,abs_discrepancy,discrepancy_times_n_over_ln_n\n";
  for (const auto& cp : e.series)
    os << cp.n << ',' << cp.hits_b << ',' << cp.t << ',' << static_cast<double>(cp.abs_discrepancy)
       << ',' << static_cast<double>(cp.scaled) << '\n';
  return os.str();
}

LatticePoint parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("expected x,y but got '" + text + "'");
  try {
    std::size_t used1 = 0, used2 = 0;
    const std::string xs = text.substr(0, comma), ys = text.substr(comma + 1);
    const long long x = std::stoll(xs, &used1);
    const long long y = std::stoll(ys, &used2);
    if (used1 != xs.size() || used2 != ys.size()) throw std::invalid_argument("trailing");
    return {x, y};
  } catch (const std::logic_error&) {
    throw UsageError("expected x,y but got '" + text + "'");
  }
}

}  // namespace rotor
