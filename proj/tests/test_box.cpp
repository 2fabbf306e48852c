#include <doctest.h>

#include <cmath>

#include "dav/box.hpp"
#include "dav/holonomy.hpp"
#include "dav/rng.hpp"

using namespace dav;

namespace {

LinearAnosov a0() {
  return analyze_linear(IntMatrix3::from_rows({3, 2, 1, 2, 2, 1, 1, 1, 1}));
}

DAMap shear_map(double eps) {
  ShearPerturbation s;
  s.target = 0;
  s.frequency = Eigen::Vector3i(0, 1, 0);
  s.amplitude = eps;
  return DAMap(a0(), {s});
}

}  // namespace

TEST_CASE("linear box is an affine parallelepiped in eigencoordinates") {
  DAMap f(a0());
  FoliationBundles b = compute_bundles(f, 8, 50);
  TorusPoint base = wrap(Vec3(0.25, 0.25, 0.25));
  FoliatedBox box = build_foliated_box(f, b, base, 0.08, 0.08, 0.15, 3, 3, 2e-3);
  LinearAnosov a = a0();
  // every leaf is base + sa*ss + sb*u + t*ws for grid (sa, sb)
  for (int cell = 0; cell < box.cell_count(); ++cell) {
    const auto& leaf = box.leaves()[static_cast<std::size_t>(cell)];
    int ia = cell / box.cells_b() - 3;
    int ib = cell % box.cells_b() - 3;
    double sa = 0.08 * ia / 3.0;
    double sb = 0.08 * ib / 3.0;
    Vec3 anchor = base.lift() + sa * a.eigenvectors[0] + sb * a.eigenvectors[2];
    for (std::size_t i = 0; i < leaf.points.size(); ++i) {
      Vec3 expect = anchor + leaf.arclength[i] * a.eigenvectors[1];
      CHECK((leaf.points[i] - expect).norm() <= 1e-10);
    }
  }
}

TEST_CASE("box coordinates round trip") {
  DAMap f = shear_map(0.05);
  FoliationBundles b = compute_bundles(f, 24, 400);
  FoliatedBox box = build_foliated_box(f, b, wrap(Vec3(0.25, 0.25, 0.25)), 0.08, 0.08, 0.15,
                                       3, 3, 2e-3);
  CounterRng rng(51, "box_rt");
  for (int trial = 0; trial < 500; ++trial) {
    int cell = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(box.cell_count()));
    double t = rng.uniform(-0.15, 0.15);
    Vec3 p = box.point(cell, t);
    auto lc = box.locate(p);
    REQUIRE(lc.has_value());
    CHECK(lc->cell == cell);
    CHECK(std::abs(lc->t - t) <= 2e-3);
  }
}

TEST_CASE("no leaf collision at shipped defaults") {
  DAMap f = shear_map(0.05);
  FoliationBundles b = compute_bundles(f, 24, 400);
  CHECK_NOTHROW(build_foliated_box(f, b, wrap(Vec3(0.25, 0.25, 0.25)), 0.1, 0.1, 0.2, 5, 5,
                                   2e-3));
}

TEST_CASE("oversized boxes are rejected") {
  DAMap f(a0());
  FoliationBundles b = compute_bundles(f, 8, 50);
  CHECK_THROWS_AS(build_foliated_box(f, b, TorusPoint(), 0.3, 0.3, 0.3, 3, 3, 2e-3), Error);
}

TEST_CASE("linear holonomy is an isometric translation") {
  DAMap f(a0());
  FoliationBundles b = compute_bundles(f, 8, 50);
  TorusPoint base = wrap(Vec3(0.4, 0.2, 0.6));
  Transversal src = make_transversal(b, PlaqueKind::CenterUnstable, base, 0.05);
  LinearAnosov a = a0();
  TorusPoint tgt_base = wrap(base.lift() + 0.07 * a.eigenvectors[1]);
  Transversal tgt = make_transversal(b, PlaqueKind::CenterUnstable, tgt_base, 0.08);
  HolonomyMap h = center_holonomy(b, PlaqueKind::CenterUnstable, src, tgt, 11, 0.5);
  CHECK(h.monotone);
  CHECK(h.lipschitz_forward == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(h.lipschitz_backward == doctest::Approx(1.0).epsilon(1e-6));
  for (double t : h.leaf_travel) CHECK(t == doctest::Approx(0.07).epsilon(1e-6));
}

TEST_CASE("holonomy bounds approach 1 as eps -> 0") {
  double prev_gap = 1e9;
  for (double eps : {0.04, 0.01}) {
    DAMap f = shear_map(eps);
    FoliationBundles b = compute_bundles(f, 24, 400);
    TorusPoint base = wrap(Vec3(0.4, 0.2, 0.6));
    Transversal src = make_transversal(b, PlaqueKind::CenterUnstable, base, 0.05);
    CenterCurve through = integrate_center_curve(b.center, base, 0.1, 1e-3);
    Transversal tgt =
        make_transversal(b, PlaqueKind::CenterUnstable, wrap(through.at(0.07)), 0.08);
    HolonomyMap h = center_holonomy(b, PlaqueKind::CenterUnstable, src, tgt, 11, 0.5);
    double gap = std::max(h.lipschitz_forward - 1.0, h.lipschitz_backward - 1.0);
    CHECK(gap < prev_gap + 1e-9);
    prev_gap = gap;
    CHECK(h.monotone);
  }
  CHECK(prev_gap <= 0.05);
}

namespace {

// piecewise-linear evaluation of a sampled monotone map
double interp_map(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
  return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
}

}  // namespace

TEST_CASE("holonomy composes along transversal chains") {
  DAMap f = shear_map(0.03);
  FoliationBundles b = compute_bundles(f, 24, 400);
  TorusPoint base = wrap(Vec3(0.4, 0.2, 0.6));
  CenterCurve through = integrate_center_curve(b.center, base, 0.15, 1e-3);
  Transversal t1 = make_transversal(b, PlaqueKind::CenterUnstable, base, 0.04);
  Transversal t2 = make_transversal(b, PlaqueKind::CenterUnstable, wrap(through.at(0.05)), 0.07);
  Transversal t3 = make_transversal(b, PlaqueKind::CenterUnstable, wrap(through.at(0.1)), 0.1);
  HolonomyMap h12 = center_holonomy(b, PlaqueKind::CenterUnstable, t1, t2, 9, 0.5);
  HolonomyMap h23 = center_holonomy(b, PlaqueKind::CenterUnstable, t2, t3, 33, 0.5);
  HolonomyMap h13 = center_holonomy(b, PlaqueKind::CenterUnstable, t1, t3, 9, 0.5);
  CHECK(h13.monotone);

  // h13 = h23 . h12 within twice the sampling tolerance of h23
  double sample_tol = (h23.source_param[1] - h23.source_param[0]);
  for (std::size_t i = 0; i < h13.source_param.size(); ++i) {
    double composed = interp_map(h23.source_param, h23.image_param, h12.image_param[i]);
    CHECK(std::abs(composed - h13.image_param[i]) <= 2.0 * sample_tol);
  }
}
