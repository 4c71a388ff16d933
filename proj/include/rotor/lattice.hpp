#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rotor/rational.hpp"

namespace rotor {

struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  auto operator<=>(const LatticePoint&) const = default;
  LatticePoint operator-(const LatticePoint& o) const { return {x - o.x, y - o.y}; }
  LatticePoint operator+(const LatticePoint& o) const { return {x + o.x, y + o.y}; }
};

/// Residues 0..3 are East, North, West, South; incrementing turns anticlockwise.
LatticePoint z2_successor(LatticePoint u, std::uint32_t i);

/// ⌊½ + (2/π)·arg(x−½, y−½)⌋ mod 4, decided by integer sector tests.
std::uint32_t z2_initial_rotor(LatticePoint v);

/// k such that v ∈ (−k,k]² but not (−k+1,k−1]².
std::uint64_t layer_of(LatticePoint v);

/// Square grid around the origin that doubles when a point falls outside.
template <class T>
class DenseGrid {
 public:
  explicit DenseGrid(T fill, std::int64_t half = 16) : fill_(fill), half_(half) {
    cells_.assign(side() * side(), fill_);
  }
  T& operator[](LatticePoint p) {
    if (!inside(p)) grow(p);
    return cells_[index(p)];
  }
  const T* find(LatticePoint p) const { return inside(p) ? &cells_[index(p)] : nullptr; }
  std::int64_t half() const { return half_; }

 private:
  std::size_t side() const { return static_cast<std::size_t>(2 * half_ + 1); }
  bool inside(LatticePoint p) const {
    return p.x >= -half_ && p.x <= half_ && p.y >= -half_ && p.y <= half_;
  }
  std::size_t index(LatticePoint p) const {
    return static_cast<std::size_t>(p.x + half_) * side() + static_cast<std::size_t>(p.y + half_);
  }
  void grow(LatticePoint p) {
    std::int64_t h = half_;
    while (p.x < -h || p.x > h || p.y < -h || p.y > h) h *= 2;
    DenseGrid bigger(fill_, h);
    for (std::int64_t x = -half_; x <= half_; ++x)
      for (std::int64_t y = -half_; y <= half_; ++y)
        bigger.cells_[bigger.index({x, y})] = cells_[index({x, y})];
    *this = std::move(bigger);
  }

  T fill_;
  std::int64_t half_;
  std::vector<T> cells_;
};

/// Potential kernel of simple random walk on ℤ²: Δa = 1[v=0], a(0) = 0.
///
/// Values on the octant 0 ≤ j ≤ n are produced row by row from the exact
/// recursion, each entry held as q + r/π with rationals q, r. The rationals
/// grow by about 2.5 bits per row, so every entry is evaluated in MPFR with
/// 3n+200 bits and stored as long double. Rows are grown lazily up to
/// max_radius; beyond it the asymptotic expansion is used.
class PotentialKernel {
 public:
  explicit PotentialKernel(unsigned max_radius = 512, unsigned exact_radius = 32);

  long double operator()(LatticePoint v);
  // q + r/π, for max(|x|,|y|) ≤ exact_radius.
  std::optional<std::pair<Rational, Rational>> exact(LatticePoint v);
  void ensure(unsigned radius);
  unsigned radius() const { return rows_done_; }
  unsigned max_radius() const { return max_radius_; }

  static long double asymptotic(LatticePoint v);
  // (2γ + 3 ln 2)/π
  static long double kappa();

 private:
  unsigned max_radius_;
  unsigned exact_radius_;
  unsigned rows_done_ = 0;  // rows 0..rows_done_ are available
  std::vector<std::vector<long double>> value_;
  std::vector<std::vector<std::pair<Rational, Rational>>> exact_;
  std::vector<std::pair<Rational, Rational>> prev_, cur_;
  Rational diag_;  // Σ_{k ≤ n} 1/(2k−1)
};

struct AsymptoticFit {
  long double A = 0;           // constant term
  long double c4_2 = 0;        // coefficient of cos4φ/r²
  long double c4_4 = 0;        // coefficient of cos4φ/r⁴
  long double c8_4 = 0;        // coefficient of cos8φ/r⁴
  long double max_residual = 0;
  std::size_t points = 0;
};

/// Least squares of a(v) − (2/π)ln|v| on [1, cos4φ/r², cos4φ/r⁴, cos8φ/r⁴]
/// over lattice points of the octant with rmin ≤ |v| ≤ rmax.
AsymptoticFit fit_asymptotic_constant(PotentialKernel& pk, double rmin, double rmax);

/// h(v) = ½ + [a(v−c) − a(v−b)] / (2a(b−c)).
long double z2_hitting_prob(PotentialKernel& pk, LatticePoint v, LatticePoint b, LatticePoint c);

/// Σ over unit edges {u,v} ⊂ B(k) of |h(u) − h(v)|, for k = 1..kmax.
std::vector<long double> lattice_gradient_sums(PotentialKernel& pk, LatticePoint b,
                                               LatticePoint c, unsigned kmax);

struct Z2Checkpoint {
  std::uint64_t n;
  std::uint64_t hits_b;
  std::uint64_t t;
  long double abs_discrepancy;  // |h(a)n − n_b|
  long double scaled;           // abs_discrepancy / ln n (0 for n = 1)
};

struct Z2Options {
  std::uint64_t max_steps = 2000000000ULL;
  bool check_identity = true;
  std::uint64_t fit_from = 10;
};

/// Rotor state after a run. The split copy of a (when a is b or c) has its
/// own rotor, which is what a renderer shows at a.
struct Z2Rotors {
  DenseGrid<std::uint8_t> grid{0xff};  // 0xff: never moved
  std::optional<std::uint8_t> a_out;
  LatticePoint a;
  LatticePoint b;
  LatticePoint c;

  std::uint32_t at(LatticePoint v) const;
};

struct Z2Experiment {
  LatticePoint a, b, c;
  std::uint64_t target = 0;
  long double h_a = 0;
  std::vector<Z2Checkpoint> series;
  long double fitted_C = 0;       // max |h(a)n − n_b| / ln n over n ≥ fit_from
  long double fitted_Cprime = 0;  // max t / n³
  std::uint64_t steps = 0;
  // Layer audits.
  bool layers_ok = true;
  std::uint64_t max_visits_between_a = 0;
  std::uint64_t max_layer = 0;
  // Largest |lhs − rhs| / max(t,1) seen in the floating key identity.
  long double identity_error = 0;
  Z2Rotors rotors;
};

/// Rotor walk from a with the compass mechanism and the sector initial
/// rotors, b and c sent to a, until n_b + n_c = target. If a equals b or c it
/// is split: the lattice point keeps the incoming role and a separate
/// outgoing copy carries a's rotor. Throws BudgetError when max_steps runs out.
Z2Experiment run_z2_experiment(PotentialKernel& pk, LatticePoint a, LatticePoint b,
                               LatticePoint c, std::uint64_t target, const Z2Options& opt = {});

/// "n,hits_b,t,abs_discrepancy,discrepancy_times_n_over_ln_n"
std::string z2_csv(const Z2Experiment& e);

LatticePoint parse_point(const std::string& text);

}  // namespace rotor
