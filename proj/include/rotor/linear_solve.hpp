#pragma once

#include <optional>
#include <vector>

#include "rotor/rational.hpp"

namespace rotor {

/// Solves A x = rhs exactly. Rows are scaled to integers and reduced with
/// Bareiss' fraction-free elimination; back substitution is rational.
/// Returns nullopt when A is singular.
std::optional<std::vector<Rational>> solve_exact(const std::vector<std::vector<Rational>>& a,
                                                 const std::vector<Rational>& rhs);

}  // namespace rotor
