#pragma once

#include <optional>
#include <vector>

#include "dav/foliation.hpp"

namespace dav {

/// Leaf coordinates of a point inside a foliated box: which transversal
/// cell (leaf) it belongs to and the arclength parameter along that leaf.
struct LeafCoordinates {
  int cell = -1;
  double t = 0.0;
  double transversal_distance = 0.0;  // distance from the leaf polyline
};

/// A foliation box: a 2-parameter su-transversal through a base point with
/// one center-leaf segment of arclength [-L, L] attached to every
/// transversal grid point. Built on the lift so that leaves are continuous
/// polylines; all sizes must be small enough that the box embeds in T^3.
class FoliatedBox {
 public:
  int cells_a() const { return 2 * n_a_ + 1; }
  int cells_b() const { return 2 * n_b_ + 1; }
  int cell_count() const { return cells_a() * cells_b(); }
  double leaf_half_length() const { return leaf_half_length_; }
  const TorusPoint& base() const { return base_; }
  const std::vector<CenterCurve>& leaves() const { return leaves_; }
  const Vec3& aabb_min() const { return aabb_min_; }
  const Vec3& aabb_max() const { return aabb_max_; }
  double enclosing_volume() const;

  /// Point of the box at (cell, leaf parameter).
  Vec3 point(int cell, double t) const;

  /// Leaf coordinates of a lift point near the box: the nearest leaf and
  /// the projected arclength parameter. Empty when the point is farther
  /// than the assignment radius from every leaf or |t| > L.
  std::optional<LeafCoordinates> locate(const Vec3& p) const;

  double assignment_radius() const { return assign_radius_; }

  friend FoliatedBox build_foliated_box(const DAMap& f, const FoliationBundles& bundles,
                                        const TorusPoint& x, double half_a, double half_b,
                                        double leaf_half_length, int n_a, int n_b,
                                        double curve_step);

 private:
  TorusPoint base_;
  int n_a_ = 0, n_b_ = 0;
  double half_a_ = 0.0, half_b_ = 0.0;
  double leaf_half_length_ = 0.0;
  std::vector<Vec3> transversal_;  // lift coordinates, row-major (a-major)
  std::vector<CenterCurve> leaves_;
  double assign_radius_ = 0.0;

  // spatial hash over leaf polyline points for locate()
  Vec3 aabb_min_ = Vec3::Zero(), aabb_max_ = Vec3::Zero();
  double hash_cell_ = 0.0;
  Eigen::Vector3i hash_dims_ = Eigen::Vector3i::Zero();
  std::vector<std::vector<std::pair<int, int>>> hash_;  // (cell, point index)

  void build_hash();
  std::size_t hash_index(const Eigen::Vector3i& c) const;
};

/// Span the transversal by integrating the strong-stable and unstable
/// fields from x, then attach a clipped center curve to every transversal
/// grid point. Throws LeafCollision if two sampled leaves approach within
/// the grid tolerance.
FoliatedBox build_foliated_box(const DAMap& f, const FoliationBundles& bundles,
                               const TorusPoint& x, double half_a, double half_b,
                               double leaf_half_length, int n_a = 5, int n_b = 5,
                               double curve_step = 2e-3);

}  // namespace dav
