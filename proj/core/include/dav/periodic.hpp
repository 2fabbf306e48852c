#pragma once

#include <cstdint>
#include <vector>

#include "dav/certify.hpp"
#include "dav/damap.hpp"

namespace dav {

/// One periodic orbit of f, found by Newton continuation on the lift of the
/// corresponding orbit of the linearization. The lift equation is
/// f~^n(x~) = x~ + m with the integer translation m inherited from A.
struct PeriodicOrbit {
  int period = 0;          // the period the orbit was continued at
  int minimal_period = 0;  // divides period
  TorusPoint representative;
  Eigen::Vector3i translation;
  double residual = 0.0;   // torus distance f^n(x) -> x
};

/// Per-direction exponents at a periodic orbit: log moduli of the
/// eigenvalues of D(f^n) at the representative, divided by n, ascending.
struct PeriodicData {
  PeriodicOrbit orbit;
  std::array<double, 3> exponents{0, 0, 0};
};

/// All fixed points of A^n on the torus, one representative per coset of
/// (A^n - I)^{-1} Z^3 / Z^3, enumerated exactly in integer arithmetic and
/// sorted lexicographically. The count equals |det(A^n - I)|.
/// Throws PeriodTooLarge when that count exceeds count_cap.
std::vector<TorusPoint> linear_periodic_points(const LinearAnosov& A, int n,
                                               std::int64_t count_cap = 20000);

/// |det(A^n - I)|, exact.
std::int64_t linear_periodic_count(const LinearAnosov& A, int n);

PeriodicOrbit continue_periodic_orbit(const DAMap& f, const TorusPoint& linear_point, int n,
                                      double tol = 1e-10, int max_iterations = 60);

/// Multiplies Df along the orbit (with per-step scaling) and extracts the
/// eigenvalue moduli of the product. Throws ComplexEigenvalues when the
/// return map spectrum has left the real-split regime.
PeriodicData periodic_data(const DAMap& f, const PeriodicOrbit& orbit);

struct ConstancyReport {
  int max_period = 0;
  double tolerance = 0.0;
  std::array<double, 3> spreads{0, 0, 0};      // max - min per direction
  std::array<bool, 3> constant{false, false, false};
  bool predicted_absolute_continuity = false;  // relevant extremal direction constant
  bool predicted_c1_rigidity = false;          // all three directions constant
  SplittingCase splitting = SplittingCase::TwoContracting;
  std::vector<PeriodicData> orbits;            // deduplicated, deterministic order
};

/// Continue every A-orbit of minimal period <= max_period to f, compute the
/// periodic data, and report the per-direction spreads and the two derived
/// verdict flags. Orbits are deduplicated by cyclic equivalence before the
/// spreads are taken. Throws IncompleteData if any orbit is lost.
ConstancyReport periodic_data_constancy(const DAMap& f, int max_period, double tol = 1e-6,
                                        std::int64_t count_cap = 20000, int workers = 0);

}  // namespace dav
