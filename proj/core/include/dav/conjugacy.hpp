#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dav/damap.hpp"
#include "dav/grid.hpp"

namespace dav {

/// Grid solution of the semi-conjugacy equation A . H = H . f with
/// H = id + u, u periodic. u is stored per eigencomponent of A (so each
/// scalar equation is a strict contraction with an explicit factor) on a
/// res^3 grid with trilinear or tricubic interpolation.
struct ConjugacyField {
  int resolution = 0;
  int interpolation_order = 1;
  Mat3 eigenbasis = Mat3::Identity();
  GridField u;  // 3 components: eigencoordinates of u at the grid nodes
  int iterations = 0;
  double final_sup_residual = 0.0;              // node residual at convergence
  std::array<std::vector<double>, 3> sup_change_log;  // per component, per iteration

  /// u(x) in standard coordinates, interpolated.
  Vec3 displacement(const TorusPoint& x) const;
  /// H on the lift: H~(x) = x + u(pi(x)).
  LiftVector h_lift(const LiftVector& x) const;
  /// sup of |u| over the grid nodes (standard coordinates).
  double sup_displacement() const;
};

/// Iterate the per-eigencomponent fixed-point forms
///   expanding:   u_i <- (g_i + u_i . f) / mu_i
///   contracting: u_i <- mu_i u_i . f^{-1} - g_i . f^{-1}
/// with g = eigencoordinates of f~ - A~, until the grid sup change of every
/// component drops below tol * (1 - kappa_i). Throws NoConvergence when
/// max_iterations is hit.
ConjugacyField solve_semiconjugacy(const DAMap& f, int resolution = 64, double tol = 1e-12,
                                   int max_iterations = 500, int interpolation_order = 1,
                                   int workers = 0);

struct ResidualStats {
  double sup = 0.0;
  double mean = 0.0;
  int samples = 0;
};

/// |A(H(x)) - H(f(x))| at random off-grid points (standard coordinates).
ResidualStats conjugacy_residual(const ConjugacyField& h, const DAMap& f, int samples,
                                 std::uint64_t seed, int workers = 0);

/// Injectivity diagnostic: among random pairs whose H-images are close, the
/// largest excess of source distance over image distance. Zero for a
/// homeomorphism H sampled exactly; a large center-aligned defect signals
/// fiber collapse.
struct FiberReport {
  double defect = 0.0;              // max(|x-y| - |Hx-Hy|) over close-image pairs
  double image_threshold = 0.0;     // what counted as "close"
  int close_pairs = 0;
  int samples = 0;
  Vec3 worst_direction = Vec3::Zero();   // x-y direction of the maximal-defect pair
  double center_alignment = 0.0;         // |cos angle(worst_direction, E^c of A)|
};

FiberReport fiber_diagnostics(const ConjugacyField& h, const DAMap& f, int samples,
                              std::uint64_t seed);

/// Empirical check of the large-separation ratio bound: for pairs at
/// increasing lift separations, the ratio |pi(f~^k x - f~^k y)| /
/// |pi(A~^k x - A~^k y)| with pi the projection onto one eigendirection
/// along the complementary eigenplane.
struct RatioRow {
  double separation = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int pairs = 0;
  int skipped = 0;  // pairs excluded by the minimum-denominator guard
  bool pass = false;
};

struct RatioCheckResult {
  bool found = false;   // some tested M works
  double m_estimate = 0.0;  // smallest tested separation beyond which all ratios pass
  double bound = 0.0;   // the C of [1/C, C]
  int iterate = 0;
  int projection_index = 0;
  std::vector<RatioRow> rows;
};

/// denominator_guard is the minimum |projection| relative to |x - y|;
/// pairs below it are skipped (degenerate-direction guard).
RatioCheckResult geometric_ratio_check(const DAMap& f, int projection_index, int iterate,
                                       double bound, int samples_per_separation,
                                       const std::vector<double>& separations,
                                       std::uint64_t seed, double denominator_guard = 0.05);

/// Persist / load the field in the flat binary layout, plus a text sidecar
/// with residual metrics.
void save_conjugacy_field(const std::filesystem::path& path, const ConjugacyField& h,
                          const ResidualStats& residual);
ConjugacyField load_conjugacy_field(const std::filesystem::path& path);

}  // namespace dav
