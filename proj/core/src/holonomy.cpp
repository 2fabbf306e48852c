#include "dav/holonomy.hpp"

#include <cmath>

namespace dav {

namespace {

// nearest polyline point: (distance, arclength parameter, index)
struct Nearest {
  double distance;
  double param;
  std::size_t segment;
};

Nearest nearest_on_curve(const CenterCurve& c, const Vec3& p) {
  Nearest best{std::numeric_limits<double>::infinity(), 0.0, 0};
  for (std::size_t s = 0; s + 1 < c.points.size(); ++s) {
    Vec3 a = c.points[s], b = c.points[s + 1];
    Vec3 ab = b - a;
    double len2 = ab.squaredNorm();
    double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    double d = (p - (a + t * ab)).norm();
    if (d < best.distance) {
      best.distance = d;
      best.param = c.arclength[s] + t * (c.arclength[s + 1] - c.arclength[s]);
      best.segment = s;
    }
  }
  return best;
}

}  // namespace

Transversal make_transversal(const FoliationBundles& bundles, PlaqueKind kind,
                             const TorusPoint& base, double half_length, double step) {
  const BundleField& field =
      kind == PlaqueKind::CenterUnstable ? bundles.unstable : bundles.strong;
  Transversal t;
  t.kind = kind;
  t.curve = integrate_center_curve(field, base, half_length, step);
  return t;
}

HolonomyMap center_holonomy(const FoliationBundles& bundles, PlaqueKind kind,
                            const Transversal& source, const Transversal& target, int samples,
                            double max_leaf_travel, double tol) {
  if (samples < 2) throw Error("center_holonomy: need at least 2 samples");
  if (source.kind != kind || target.kind != kind)
    throw Error("center_holonomy: transversal kinds do not match the plaque kind");

  const BundleField& center = bundles.center;

  // signed advance of p past the target curve, measured along the center
  // direction at the nearest target point
  auto advance = [&](const Vec3& p) {
    Nearest n = nearest_on_curve(target.curve, p);
    Vec3 q = target.curve.at(n.param);
    Vec3 cdir = center.direction(wrap(q));
    return std::make_pair((p - q).dot(cdir), n);
  };

  HolonomyMap map;
  const double lo = source.curve.arclength.front();
  const double hi = source.curve.arclength.back();

  for (int i = 0; i < samples; ++i) {
    double s = lo + (hi - lo) * i / (samples - 1);
    Vec3 p0 = source.curve.at(s);

    auto [adv0, n0] = advance(p0);
    double dir = adv0 < 0 ? +1.0 : -1.0;  // march toward the target

    // trace the center leaf from p0 with a fixed stride until the advance
    // changes sign, then bisect on the arclength
    const double stride = std::max(64.0 * tol, max_leaf_travel / 512.0);
    CenterCurve leaf =
        integrate_curve_one_sided(center, wrap(p0), max_leaf_travel, stride, dir > 0);
    Vec3 shift = p0 - leaf.points.front();

    auto leaf_at = [&](double t) { return Vec3(leaf.at(t) + shift); };

    double t_lo = 0.0, t_hi = -1.0;
    double prev = adv0;
    for (std::size_t k = 1; k < leaf.points.size(); ++k) {
      double t = leaf.arclength[k];
      double a = advance(leaf_at(t)).first;
      if ((a >= 0) != (prev >= 0)) {
        t_lo = leaf.arclength[k - 1];
        t_hi = t;
        break;
      }
      prev = a;
    }
    if (t_hi < 0) {
      throw LeafEscape("center_holonomy: leaf from source parameter " + std::to_string(s) +
                       " does not reach the target within " + std::to_string(max_leaf_travel));
    }
    double a_lo = advance(leaf_at(t_lo)).first;
    while (t_hi - t_lo > tol) {
      double mid = 0.5 * (t_lo + t_hi);
      double am = advance(leaf_at(mid)).first;
      if ((am >= 0) == (a_lo >= 0)) {
        t_lo = mid;
        a_lo = am;
      } else {
        t_hi = mid;
      }
    }
    double t_cross = 0.5 * (t_lo + t_hi);
    auto [a_cross, n_cross] = advance(leaf_at(t_cross));
    (void)a_cross;

    map.source_param.push_back(s);
    map.image_param.push_back(n_cross.param);
    map.leaf_travel.push_back(dir * t_cross);
  }

  map.monotone = true;
  double lf = 0.0, lb = 0.0;
  for (std::size_t i = 1; i < map.source_param.size(); ++i) {
    double ds = map.source_param[i] - map.source_param[i - 1];
    double di = map.image_param[i] - map.image_param[i - 1];
    if (di <= 0) map.monotone = false;
    if (std::abs(ds) > 0) lf = std::max(lf, std::abs(di) / std::abs(ds));
    if (std::abs(di) > 0) lb = std::max(lb, std::abs(ds) / std::abs(di));
  }
  map.lipschitz_forward = lf;
  map.lipschitz_backward = lb;
  return map;
}

}  // namespace dav
