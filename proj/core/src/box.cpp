#include "dav/box.hpp"

#include <cmath>

namespace dav {

namespace {

// distance from p to segment [a, b], and the projection parameter in [0,1]
std::pair<double, double> point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double len2 = ab.squaredNorm();
  double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return {(p - (a + t * ab)).norm(), t};
}

}  // namespace

double FoliatedBox::enclosing_volume() const {
  Vec3 d = aabb_max_ - aabb_min_;
  return d[0] * d[1] * d[2];
}

Vec3 FoliatedBox::point(int cell, double t) const {
  if (cell < 0 || cell >= cell_count()) throw Error("FoliatedBox::point: cell out of range");
  return leaves_[static_cast<std::size_t>(cell)].at(t);
}

std::size_t FoliatedBox::hash_index(const Eigen::Vector3i& c) const {
  return (static_cast<std::size_t>(c[0]) * hash_dims_[1] + c[1]) * hash_dims_[2] + c[2];
}

void FoliatedBox::build_hash() {
  Vec3 lo = transversal_.front(), hi = transversal_.front();
  for (const auto& leaf : leaves_)
    for (const auto& p : leaf.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  const double margin = 2.0 * assign_radius_;
  aabb_min_ = lo - Vec3::Constant(margin);
  aabb_max_ = hi + Vec3::Constant(margin);

  hash_cell_ = std::max(2.0 * assign_radius_, 1e-3);
  Vec3 ext = aabb_max_ - aabb_min_;
  for (int i = 0; i < 3; ++i)
    hash_dims_[i] = std::max(1, static_cast<int>(std::ceil(ext[i] / hash_cell_)) + 1);
  hash_.assign(static_cast<std::size_t>(hash_dims_[0]) * hash_dims_[1] * hash_dims_[2], {});
  for (int cell = 0; cell < cell_count(); ++cell) {
    const auto& leaf = leaves_[static_cast<std::size_t>(cell)];
    for (std::size_t pi = 0; pi < leaf.points.size(); ++pi) {
      Vec3 rel = (leaf.points[pi] - aabb_min_) / hash_cell_;
      Eigen::Vector3i c(static_cast<int>(rel[0]), static_cast<int>(rel[1]),
                        static_cast<int>(rel[2]));
      hash_[hash_index(c)].push_back({cell, static_cast<int>(pi)});
    }
  }
}

std::optional<LeafCoordinates> FoliatedBox::locate(const Vec3& p) const {
  for (int i = 0; i < 3; ++i)
    if (p[i] < aabb_min_[i] || p[i] > aabb_max_[i]) return std::nullopt;
  Vec3 rel = (p - aabb_min_) / hash_cell_;
  Eigen::Vector3i c(static_cast<int>(rel[0]), static_cast<int>(rel[1]),
                    static_cast<int>(rel[2]));

  int best_cell = -1;
  int best_point = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj)
      for (int dk = -1; dk <= 1; ++dk) {
        Eigen::Vector3i cc = c + Eigen::Vector3i(di, dj, dk);
        if (cc[0] < 0 || cc[1] < 0 || cc[2] < 0 || cc[0] >= hash_dims_[0] ||
            cc[1] >= hash_dims_[1] || cc[2] >= hash_dims_[2])
          continue;
        for (auto [cell, pi] : hash_[hash_index(cc)]) {
          double d = (leaves_[static_cast<std::size_t>(cell)].points[static_cast<std::size_t>(pi)] - p).norm();
          if (d < best_d) {
            best_d = d;
            best_cell = cell;
            best_point = pi;
          }
        }
      }
  if (best_cell < 0) return std::nullopt;

  // refine on the two polyline segments adjacent to the nearest point
  const auto& leaf = leaves_[static_cast<std::size_t>(best_cell)];
  double refined_d = std::numeric_limits<double>::infinity();
  double refined_t = 0.0;
  for (int s = best_point - 1; s <= best_point; ++s) {
    if (s < 0 || s + 1 >= static_cast<int>(leaf.points.size())) continue;
    auto [d, t] = point_segment(p, leaf.points[static_cast<std::size_t>(s)],
                                leaf.points[static_cast<std::size_t>(s) + 1]);
    if (d < refined_d) {
      refined_d = d;
      refined_t = leaf.arclength[static_cast<std::size_t>(s)] +
                  t * (leaf.arclength[static_cast<std::size_t>(s) + 1] -
                       leaf.arclength[static_cast<std::size_t>(s)]);
    }
  }
  if (refined_d > assign_radius_) return std::nullopt;
  if (std::abs(refined_t) > leaf_half_length_) return std::nullopt;
  LeafCoordinates lc;
  lc.cell = best_cell;
  lc.t = refined_t;
  lc.transversal_distance = refined_d;
  return lc;
}

FoliatedBox build_foliated_box(const DAMap& f, const FoliationBundles& bundles,
                               const TorusPoint& x, double half_a, double half_b,
                               double leaf_half_length, int n_a, int n_b, double curve_step) {
  (void)f;
  if (n_a < 1 || n_b < 1) throw Error("build_foliated_box: transversal cells must be >= 1");
  if (!(half_a > 0) || !(half_b > 0) || !(leaf_half_length > 0))
    throw Error("build_foliated_box: sizes must be positive");
  if (half_a + half_b + leaf_half_length > 0.45)
    throw Error("build_foliated_box: box too large to embed in the torus");

  FoliatedBox box;
  box.base_ = x;
  box.n_a_ = n_a;
  box.n_b_ = n_b;
  box.half_a_ = half_a;
  box.half_b_ = half_b;
  box.leaf_half_length_ = leaf_half_length;

  // spine along the strong-stable direction
  CenterCurve spine = integrate_center_curve(bundles.strong, x, half_a, curve_step);
  std::vector<Vec3> grid;
  const int na = 2 * n_a + 1, nb = 2 * n_b + 1;
  grid.reserve(static_cast<std::size_t>(na) * nb);
  for (int ia = -n_a; ia <= n_a; ++ia) {
    double sa = half_a * ia / n_a;
    Vec3 pa = spine.at(sa);
    // ribs along the unstable direction, integrated from each spine point
    CenterCurve rib = integrate_center_curve(bundles.unstable, wrap(pa), half_b, curve_step);
    Vec3 shift = pa - rib.points[static_cast<std::size_t>(rib.base_index)];  // keep the lift branch
    for (int ib = -n_b; ib <= n_b; ++ib) {
      double sb = half_b * ib / n_b;
      grid.push_back(rib.at(sb) + shift);
    }
  }
  box.transversal_ = grid;

  // Leaves carry a margin past +-L so that projections of points near the
  // segment ends land on interior segments; locate() still restricts the
  // parameter to [-L, L], which keeps end caps out of the histograms.
  const double leaf_margin = 0.15 * leaf_half_length + 0.01;
  box.leaves_.reserve(grid.size());
  for (const auto& p : grid) {
    CenterCurve leaf = integrate_center_curve(bundles.center, wrap(p),
                                              leaf_half_length + leaf_margin, curve_step);
    Vec3 shift = p - leaf.points[static_cast<std::size_t>(leaf.base_index)];
    for (auto& q : leaf.points) q += shift;
    box.leaves_.push_back(std::move(leaf));
  }

  // assignment radius: a fraction of the smallest transversal spacing
  double min_spacing = std::numeric_limits<double>::infinity();
  auto at = [&](int ia, int ib) -> const Vec3& {
    return grid[static_cast<std::size_t>(ia) * nb + static_cast<std::size_t>(ib)];
  };
  for (int ia = 0; ia < na; ++ia)
    for (int ib = 0; ib < nb; ++ib) {
      if (ia + 1 < na) min_spacing = std::min(min_spacing, (at(ia + 1, ib) - at(ia, ib)).norm());
      if (ib + 1 < nb) min_spacing = std::min(min_spacing, (at(ia, ib + 1) - at(ia, ib)).norm());
    }
  box.assign_radius_ = 0.45 * min_spacing;

  box.build_hash();

  // disjointness on the sampled grid: no two leaves may come closer than
  // the collision tolerance anywhere along their polylines
  const double collision_tol = 0.5 * box.assign_radius_;
  for (int cell = 0; cell < box.cell_count(); ++cell) {
    const auto& leaf = box.leaves_[static_cast<std::size_t>(cell)];
    for (const auto& p : leaf.points) {
      Vec3 rel = (p - box.aabb_min_) / box.hash_cell_;
      Eigen::Vector3i c(static_cast<int>(rel[0]), static_cast<int>(rel[1]),
                        static_cast<int>(rel[2]));
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          for (int dk = -1; dk <= 1; ++dk) {
            Eigen::Vector3i cc = c + Eigen::Vector3i(di, dj, dk);
            if (cc[0] < 0 || cc[1] < 0 || cc[2] < 0 || cc[0] >= box.hash_dims_[0] ||
                cc[1] >= box.hash_dims_[1] || cc[2] >= box.hash_dims_[2])
              continue;
            for (auto [ocell, opi] : box.hash_[box.hash_index(cc)]) {
              if (ocell == cell) continue;
              double d = (box.leaves_[static_cast<std::size_t>(ocell)]
                              .points[static_cast<std::size_t>(opi)] -
                          p)
                             .norm();
              if (d < collision_tol) {
                throw LeafCollision("foliated box: leaves " + std::to_string(cell) + " and " +
                                    std::to_string(ocell) + " approach within " +
                                    std::to_string(d));
              }
            }
          }
    }
  }
  return box;
}

}  // namespace dav
