#pragma once

#include <cstdint>
#include <optional>

#include "dav/certify.hpp"
#include "dav/damap.hpp"

namespace dav {

/// Finite-time Lyapunov exponents of one orbit, in nats per iterate,
/// sorted ascending. For volume-preserving maps the three values sum to 0
/// up to finite-time error.
struct ExponentTriple {
  double low = 0.0;
  double mid = 0.0;
  double high = 0.0;
  int orbit_length = 0;
  TorusPoint base;

  double sum() const { return low + mid + high; }
};

/// Monte-Carlo volume average of finite-time exponents with per-component
/// standard errors. Reproducible: sample i uses the deterministic stream
/// (seed, "cocycle", i).
struct ExponentEstimate {
  ExponentTriple mean;
  std::array<double, 3> standard_error{0, 0, 0};
  int samples = 0;
  int orbit_length = 0;
  std::uint64_t seed = 0;
};

/// Benettin-style cocycle iteration: an orthonormal frame is propagated by
/// Df and re-orthonormalized every step; accumulated log stretch factors
/// give the exponents. `burn_in` unrecorded iterates first let the frame
/// align with the Oseledets flag.
ExponentTriple finite_time_exponents(const DAMap& f, const TorusPoint& x, int n,
                                     int burn_in = 100);

/// Same, iterating f^{-1} along the backward orbit.
ExponentTriple finite_time_exponents_backward(const DAMap& f, const TorusPoint& x, int n,
                                              int burn_in = 100);

ExponentEstimate volume_average_exponents(const DAMap& f, int samples, int n,
                                          std::uint64_t seed, int burn_in = 100,
                                          int workers = 0);

/// Pass/fail report for the exponent inequalities against the linearization,
/// at the 3-sigma level of the Monte-Carlo estimate.
struct InequalityReport {
  double lambda_u_linear = 0.0;
  double lambda_ss_linear = 0.0;
  double lambda_ws_linear = 0.0;

  bool unstable_ok = false;       // mean high <= lambda^u_A + 3 se
  bool strong_stable_ok = false;  // mean low >= lambda^ss_A - 3 se
  std::optional<bool> weak_stable_ok;  // two-contracting case only
  bool zero_sum_ok = false;
  double zero_sum_residual = 0.0;
  double zero_sum_tolerance = 1e-3;

  bool all_ok() const {
    return unstable_ok && strong_stable_ok && zero_sum_ok &&
           weak_stable_ok.value_or(true);
  }
};

/// Throws SplittingMismatch if the certified splitting case disagrees with
/// the linearization's.
InequalityReport exponent_inequality_report(const DAMap& f, const PHCertificate& cert,
                                            const ExponentEstimate& estimate,
                                            double zero_sum_tol = 1e-3);

}  // namespace dav
