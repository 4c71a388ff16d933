#include "rotor/linear_solve.hpp"

#include <cassert>
#include <utility>

namespace rotor {

std::optional<std::vector<Rational>> solve_exact(const std::vector<std::vector<Rational>>& a,
                                                 const std::vector<Rational>& rhs) {
  const std::size_t n = a.size();
  assert(rhs.size() == n);
  // Augmented integer matrix: each row multiplied by the lcm of its denominators.
  std::vector<std::vector<BigInt>> m(n, std::vector<BigInt>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    BigInt scale = rhs[i].get_den();
    for (std::size_t j = 0; j < n; ++j) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), a[i][j].get_den_mpz_t());
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j].get_num() * (scale / a[i][j].get_den());
    m[i][n] = rhs[i].get_num() * (scale / rhs[i].get_den());
  }

  BigInt prev = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    while (pivot < n && m[pivot][k] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    if (pivot != k) std::swap(m[pivot], m[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j <= n; ++j) {
        m[i][j] = m[i][j] * m[k][k] - m[i][k] * m[k][j];
        mpz_divexact(m[i][j].get_mpz_t(), m[i][j].get_mpz_t(), prev.get_mpz_t());
      }
      m[i][k] = 0;
    }
    prev = m[k][k];
  }

  std::vector<Rational> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    Rational acc(m[ii][n]);
    for (std::size_t j = ii + 1; j < n; ++j)
      if (m[ii][j] != 0) acc -= Rational(m[ii][j]) * x[j];
    x[ii] = acc / Rational(m[ii][ii]);
  }
  return x;
}

}  // namespace rotor
