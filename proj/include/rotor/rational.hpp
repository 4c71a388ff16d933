#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace rotor {

using Rational = mpq_class;
using BigInt = mpz_class;

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  Rational q(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den)));
  q.canonicalize();
  return q;
}

inline Rational rabs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// Always "num/den", even for integers, so CSV columns parse uniformly.
inline std::string to_fraction_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline double to_double(const Rational& q) { return q.get_d(); }

}  // namespace rotor
