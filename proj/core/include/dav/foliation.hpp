#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dav/damap.hpp"
#include "dav/grid.hpp"

namespace dav {

enum class BundleLabel { StrongStable, Center, Unstable };

/// Invariant line bundle sampled on a grid: unit vectors, sign-coherent
/// with the corresponding linear eigendirection.
struct BundleField {
  BundleLabel label = BundleLabel::Center;
  std::string label_name;  // "ss"/"ws"/"u" or "s"/"wu"/"uu" per splitting case
  int resolution = 0;
  GridField field;         // 3 components, unit vectors at nodes
  Vec3 reference_direction = Vec3::Zero();  // sign convention anchor
  int iterations = 0;
  double convergence_angle = 0.0;   // max angle change of the last sweep
  double invariance_residual = -1.0;  // filled by measure_invariance

  /// Interpolated, normalized, sign-coherent direction at x.
  Vec3 direction(const TorusPoint& x) const;
};

struct FoliationBundles {
  BundleField strong;    // ss (or s)
  BundleField center;    // ws (or wu)
  BundleField unstable;  // u (or uu)

  const BundleField& by_label(BundleLabel l) const;
};

/// Graph-transform computation of one invariant bundle:
///  - the dominant forward bundle by pushing a generic field forward,
///  - the dominant backward bundle under f^{-1},
///  - the center by iterating inside the invariant 2-plane bundle
///    (plane tracked through its normal) with the dominant direction
///    deflated by re-projection every step.
/// Convergence: successive grids differ by at most angle_tol (max angle).
BundleField compute_bundle(const DAMap& f, BundleLabel label, int resolution = 48,
                           int max_iterations = 400, double angle_tol = 1e-10,
                           int workers = 0);

/// All three bundles (the center's plane iteration reuses no state from the
/// other two; this is just a convenience wrapper).
FoliationBundles compute_bundles(const DAMap& f, int resolution = 48, int max_iterations = 400,
                                 double angle_tol = 1e-10, int workers = 0);

/// Max angle between Df(x) E(x) and E(f x) over random off-grid samples.
double measure_invariance(const DAMap& f, const BundleField& field, int samples,
                          std::uint64_t seed, int workers = 0);

/// Leaf segment of the foliation tangent to `field`, integrated from x0 by
/// arclength in both orientations (RK4 on the unit field). The polyline is
/// stored on the lift; index base_index is x0, arclength runs from
/// -half_length to +half_length.
struct CenterCurve {
  TorusPoint base;
  std::vector<Vec3> points;     // lift coordinates
  std::vector<double> arclength;
  int base_index = 0;
  double step = 0.0;

  double length() const { return arclength.empty() ? 0.0 : arclength.back() - arclength.front(); }
  /// Point at a given arclength parameter (linear interpolation).
  Vec3 at(double s) const;
};

CenterCurve integrate_center_curve(const BundleField& field, const TorusPoint& x0,
                                   double half_length, double step);

/// One-sided variant: from x0 along +/- the field direction only.
CenterCurve integrate_curve_one_sided(const BundleField& field, const TorusPoint& x0,
                                      double length, double step, bool forward = true);

void save_bundle_field(const std::filesystem::path& path, const BundleField& b);

}  // namespace dav
