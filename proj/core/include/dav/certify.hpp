#pragma once

#include <optional>
#include <string>

#include "dav/damap.hpp"

namespace dav {

/// Empirical partial-hyperbolicity certificate: cone invariance for cones
/// built around the linear eigendirections, plus measured per-step growth
/// factors (stand-ins for the constants lambda < gamma^ < 1 < gamma < mu of
/// the splitting definition), sampled over a grid of finite orbits.
struct PHCertificate {
  std::array<double, 3> apertures{0.3, 0.3, 0.3};  // stable, center, unstable cones
  int iterates = 8;
  int grid_resolution = 16;
  bool verified = false;
  SplittingCase splitting = SplittingCase::TwoContracting;

  // per-step factors measured over the grid (after frame burn-in)
  double rate_strong_max = 0.0;   // "lambda": slowest contraction seen in the strong stable
  double rate_center_min = 0.0;   // "gamma^"
  double rate_center_max = 0.0;   // "gamma"
  double rate_unstable_min = 0.0; // "mu": weakest expansion seen in the unstable

  std::optional<Eigen::Vector3i> first_violation;  // lexicographically first grid index
  std::string violation_reason;
};

/// Check cone invariance of Df^N over a grid of base points and record the
/// empirical contraction/expansion factors. Grid points are processed in
/// parallel; the reported first violation is the lexicographically smallest
/// grid index regardless of worker count.
PHCertificate verify_partial_hyperbolicity(const DAMap& f, int iterates = 8,
                                           int grid_resolution = 16,
                                           std::array<double, 3> apertures = {0.3, 0.3, 0.3},
                                           int workers = 0);

/// Throws CertificationFailed if the certificate is not verified.
void require_certified(const PHCertificate& cert);

}  // namespace dav
