#include <cmath>

#include "dav/disintegration.hpp"
#include "dav/periodic.hpp"

namespace dav {

namespace {

double polyline_length(const std::vector<Vec3>& pts) {
  double l = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) l += (pts[i] - pts[i - 1]).norm();
  return l;
}

// Resample a polyline to uniform arclength spacing with the given point
// count (endpoints preserved).
std::vector<Vec3> resample_polyline(const std::vector<Vec3>& pts, std::size_t count) {
  if (pts.size() < 2 || count < 2) return pts;
  std::vector<double> arc(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
  double total = arc.back();
  std::vector<Vec3> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < count; ++i) {
    double s = total * static_cast<double>(i) / static_cast<double>(count - 1);
    while (seg + 2 < pts.size() && arc[seg + 1] < s) ++seg;
    double span = arc[seg + 1] - arc[seg];
    double t = span > 0 ? (s - arc[seg]) / span : 0.0;
    out.push_back(pts[seg] + t * (pts[seg + 1] - pts[seg]));
  }
  return out;
}

}  // namespace

MkConstruction::MkConstruction(const DAMap& f, const FoliationBundles& bundles, double gamma0,
                               int k_max, double curve_step)
    : f_(&f),
      bundles_(&bundles),
      gamma0_(gamma0),
      lambda_(std::abs(f.linear().center_eigenvalue())),
      k_max_(k_max),
      curve_step_(curve_step) {
  if (!(gamma0 > 0)) throw Error("MkConstruction: gamma0 must be positive");
  if (k_max < 0) throw Error("MkConstruction: k_max must be >= 0");

  // the fixed point of f continued from the origin of A
  PeriodicOrbit fp = continue_periodic_orbit(f, TorusPoint(), 1);
  fixed_point_ = fp.representative;

  // precheck: gamma0 center segments must change length monotonically in
  // the direction dictated by the center eigenvalue along the whole k range
  const bool contracting = lambda_ < 1.0;
  for (double off : {0.11, 0.53}) {
    TorusPoint probe = wrap(fixed_point_.lift() + Vec3(off, off / 2, off / 3));
    CenterCurve seg = integrate_curve_one_sided(bundles_->center, probe, gamma0_, curve_step_);
    std::vector<Vec3> pts = seg.points;
    double prev = polyline_length(pts);
    for (int k = 1; k <= k_max_; ++k) {
      for (auto& p : pts) p = f.apply_lift(p);
      pts = resample_polyline(pts, pts.size());
      double len = polyline_length(pts);
      bool ok = contracting ? len < prev : len > prev;
      if (!ok) {
        throw Error("MkConstruction: gamma0 segments are not monotone under iteration "
                    "(gamma0 too small for this map)");
      }
      prev = len;
    }
  }
}

std::vector<TorusPoint> MkConstruction::reference_points(int per_side, double half_size) const {
  // grid of an su-patch through the fixed point
  CenterCurve spine =
      integrate_center_curve(bundles_->strong, fixed_point_, half_size, curve_step_);
  std::vector<TorusPoint> out;
  for (int ia = -per_side; ia <= per_side; ++ia) {
    double sa = half_size * ia / std::max(1, per_side);
    TorusPoint pa = wrap(spine.at(sa));
    CenterCurve rib = integrate_center_curve(bundles_->unstable, pa, half_size, curve_step_);
    for (int ib = -per_side; ib <= per_side; ++ib) {
      double sb = half_size * ib / std::max(1, per_side);
      out.push_back(wrap(rib.at(sb)));
    }
  }
  return out;
}

MkMeasure MkConstruction::build(const TorusPoint& xi, int k) const {
  if (k < 0 || k > k_max_) throw NoCrossing("MkMeasure: level outside the validated range");

  // seed the segment at the k-fold preimage and push it forward: by the
  // invariance of the reference surface the pushed endpoint is exactly the
  // crossing point q_k on the center leaf of xi
  Vec3 x0 = xi.lift();
  for (int i = 0; i < k; ++i) x0 = f_->invert_lift(x0);

  CenterCurve seed;
  try {
    seed = integrate_curve_one_sided(bundles_->center, wrap(x0), gamma0_, curve_step_);
  } catch (const SignFlip& e) {
    throw NoCrossing(std::string("MkMeasure: center trace failed: ") + e.what());
  }

  std::vector<Vec3> pts = seed.points;
  const std::size_t target_count = pts.size();
  for (int i = 0; i < k; ++i) {
    for (auto& p : pts) p = f_->apply_lift(p);
    pts = resample_polyline(pts, target_count);
  }

  MkMeasure m;
  m.base = xi;
  m.level = k;
  m.mass = std::pow(lambda_, k);
  m.segment = std::move(pts);
  m.length = polyline_length(m.segment);
  if (!(m.length > 0)) throw NoCrossing("MkMeasure: degenerate segment");
  return m;
}

MkScan mk_length_ratio_scan(const MkConstruction& mk, const std::vector<TorusPoint>& xis,
                            int k_max) {
  MkScan scan;
  for (std::size_t xi = 0; xi < xis.size(); ++xi) {
    for (int k = 0; k <= k_max; ++k) {
      MkMeasure m = mk.build(xis[xi], k);
      MkScanRow row;
      row.xi_index = static_cast<int>(xi);
      row.level = k;
      row.mass = m.mass;
      row.length = m.length;
      row.ratio = m.mass / m.length;
      scan.rows.push_back(row);
    }
  }

  double beta = 0.0;
  for (const auto& r : scan.rows) beta = std::max(beta, std::max(r.ratio, 1.0 / r.ratio));
  scan.beta = beta;

  // OLS of ratio against k; a significant slope means the band drifts
  double n = static_cast<double>(scan.rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : scan.rows) {
    sx += r.level;
    sy += r.ratio;
    sxx += static_cast<double>(r.level) * r.level;
    sxy += r.level * r.ratio;
  }
  double denom = n * sxx - sx * sx;
  if (denom > 0 && n > 2) {
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double sse = 0;
    for (const auto& r : scan.rows) {
      double e = r.ratio - (intercept + slope * r.level);
      sse += e * e;
    }
    double sigma2 = sse / (n - 2);
    scan.trend_slope = slope;
    scan.trend_se = std::sqrt(sigma2 * n / denom);
    scan.trend_significant = std::abs(slope) > 3.0 * scan.trend_se;
  }
  return scan;
}

double center_exponent_from_mk(const DAMap& f, const FoliationBundles& bundles,
                               const TorusPoint& x, int n, double segment_length, double step) {
  if (n < 1) throw Error("center_exponent_from_mk: n must be >= 1");
  TorusPoint y = x;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    CenterCurve seg;
    try {
      seg = integrate_curve_one_sided(bundles.center, y, segment_length, step);
    } catch (const SignFlip& e) {
      throw NoCrossing(std::string("center_exponent_from_mk: ") + e.what());
    }
    double len0 = polyline_length(seg.points);
    std::vector<Vec3> pushed = seg.points;
    for (auto& p : pushed) p = f.apply_lift(p);
    double len1 = polyline_length(pushed);
    if (!(len0 > 0) || !(len1 > 0))
      throw NoCrossing("center_exponent_from_mk: degenerate segment");
    sum += std::log(len1 / len0);
    y = f.apply(y);
  }
  return sum / n;
}

}  // namespace dav
