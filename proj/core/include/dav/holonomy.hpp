#pragma once

#include "dav/foliation.hpp"

namespace dav {

enum class PlaqueKind { CenterStable, CenterUnstable };

/// A transversal to the center foliation inside a cs- or cu-plaque: an
/// unstable curve (cu) or a strong-stable curve (cs) through a base point.
struct Transversal {
  PlaqueKind kind = PlaqueKind::CenterUnstable;
  CenterCurve curve;  // polyline on the lift, arclength parameterized
};

/// Sampled holonomy along center leaves between two transversals of one
/// plaque, with measured two-sided Lipschitz bounds.
struct HolonomyMap {
  std::vector<double> source_param;
  std::vector<double> image_param;
  std::vector<double> leaf_travel;   // center arclength from source to target
  double lipschitz_forward = 0.0;    // max |d image| / |d source|
  double lipschitz_backward = 0.0;   // max |d source| / |d image|
  bool monotone = false;
};

Transversal make_transversal(const FoliationBundles& bundles, PlaqueKind kind,
                             const TorusPoint& base, double half_length, double step = 2e-3);

/// Slide `samples` points of the source transversal along their center
/// leaves until they cross the target transversal (bisection on leaf
/// arclength against the signed advance past the target curve).
/// Throws LeafEscape when a leaf leaves the plaque chart without crossing.
HolonomyMap center_holonomy(const FoliationBundles& bundles, PlaqueKind kind,
                            const Transversal& source, const Transversal& target, int samples,
                            double max_leaf_travel = 1.0, double tol = 1e-10);

}  // namespace dav
