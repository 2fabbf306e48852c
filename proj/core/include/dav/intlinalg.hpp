#pragma once

#include <array>
#include <cstdint>

#include "dav/torus.hpp"

namespace dav {

/// Diagonalization of an integer matrix over Z by unimodular row and
/// column operations: diag = L * M * R with the diagonal made nonnegative.
/// Only R is tracked (the row operations do not affect the solution set of
/// M x = 0 mod Z^3).
struct IntDiagonalization {
  std::array<std::int64_t, 3> diag;  // nonnegative
  IntMatrix3 right;                  // unimodular R with L*M*R diagonal
};

IntDiagonalization diagonalize_over_z(const IntMatrix3& M);

}  // namespace dav
