#include <doctest.h>

#include <cmath>

#include "dav/periodic.hpp"

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

// independent count oracle: |det(A^n - I)| by direct integer arithmetic
std::int64_t det_count(int n) {
  IntMatrix3 p = IntMatrix3::identity();
  IntMatrix3 a = IntMatrix3::from_rows({3, 2, 1, 2, 2, 1, 1, 1, 1});
  for (int i = 0; i < n; ++i) p = p * a;
  return std::abs((p - IntMatrix3::identity()).det());
}

}  // namespace

TEST_CASE("fixed point count identity for n = 1..6") {
  LinearAnosov a = a0();
  // frozen oracle values: 1, 13, 91, 533, 2911, 15379
  const std::int64_t expect[] = {1, 13, 91, 533, 2911, 15379};
  for (int n = 1; n <= 6; ++n) {
    CHECK(linear_periodic_count(a, n) == expect[n - 1]);
    CHECK(linear_periodic_count(a, n) == det_count(n));
    auto pts = linear_periodic_points(a, n);
    CHECK(static_cast<std::int64_t>(pts.size()) == expect[n - 1]);
    // every enumerated point satisfies A^n x = x on the torus
    DAMap f(a0());
    for (const auto& p : pts) {
      TorusPoint y = p;
      for (int i = 0; i < n; ++i) y = f.apply(y);
      CHECK(torus_distance(y, p) <= 1e-9);
    }
  }
}

TEST_CASE("period cap raises PeriodTooLarge") {
  CHECK_THROWS_AS(linear_periodic_points(a0(), 8, 20000), PeriodTooLarge);
}

TEST_CASE("origin is fixed for every period") {
  for (int n = 1; n <= 4; ++n) {
    auto pts = linear_periodic_points(a0(), n);
    bool has_origin = false;
    for (const auto& p : pts) has_origin = has_origin || p.coords().norm() == 0.0;
    CHECK(has_origin);
  }
}

TEST_CASE("linear continuation returns the input") {
  DAMap f(a0());
  auto pts = linear_periodic_points(a0(), 2);
  for (const auto& p : pts) {
    PeriodicOrbit orbit = continue_periodic_orbit(f, p, 2);
    CHECK(torus_distance(orbit.representative, p) <= 1e-12);
    CHECK(orbit.residual <= 1e-10);
  }
}

TEST_CASE("continued fixed point stays O(eps) from the origin") {
  DAMap f = shear_map(0.01);
  PeriodicOrbit orbit = continue_periodic_orbit(f, TorusPoint(), 1);
  CHECK(orbit.residual <= 1e-10);
  CHECK(torus_distance(orbit.representative, TorusPoint()) <= 0.1);

  // brute-force oracle: refine a grid around the origin for the fixed point
  double best = 1e9;
  Vec3 center = Vec3::Zero();
  double span = 0.1;
  for (int round = 0; round < 6; ++round) {
    Vec3 arg_best = center;
    for (int i = -5; i <= 5; ++i)
      for (int j = -5; j <= 5; ++j)
        for (int k = -5; k <= 5; ++k) {
          Vec3 x = center + span * Vec3(i, j, k) / 5.0;
          double r = torus_distance(f.apply(wrap(x)), wrap(x));
          if (r < best) {
            best = r;
            arg_best = x;
          }
        }
    center = arg_best;
    span /= 5.0;
  }
  CHECK(torus_distance(orbit.representative, wrap(center)) <= 1e-3);
}

TEST_CASE("periodic data on the linear map equals the eigen exponents") {
  DAMap f(a0());
  LinearAnosov a = a0();
  for (int n = 1; n <= 3; ++n) {
    for (const auto& p : linear_periodic_points(a, n)) {
      PeriodicOrbit orbit = continue_periodic_orbit(f, p, n);
      PeriodicData d = periodic_data(f, orbit);
      CHECK(d.exponents[0] == doctest::Approx(a.exponents[0]).epsilon(1e-10));
      CHECK(d.exponents[1] == doctest::Approx(a.exponents[1]).epsilon(1e-10));
      CHECK(d.exponents[2] == doctest::Approx(a.exponents[2]).epsilon(1e-10));
      CHECK(std::abs(d.exponents[0] + d.exponents[1] + d.exponents[2]) <= 1e-8);
    }
  }
}

TEST_CASE("periodic data is a spectral invariant of the orbit point") {
  DAMap f = shear_map(0.03);
  PeriodicOrbit orbit = continue_periodic_orbit(f, linear_periodic_points(a0(), 3)[5], 3);
  PeriodicData d0 = periodic_data(f, orbit);
  // cycle the representative around the orbit
  PeriodicOrbit shifted = orbit;
  shifted.representative = f.apply(orbit.representative);
  shifted.residual = torus_distance(
      [&] {
        TorusPoint y = shifted.representative;
        for (int i = 0; i < 3; ++i) y = f.apply(y);
        return y;
      }(),
      shifted.representative);
  PeriodicData d1 = periodic_data(f, shifted);
  for (int c = 0; c < 3; ++c)
    CHECK(d0.exponents[static_cast<std::size_t>(c)] ==
          doctest::Approx(d1.exponents[static_cast<std::size_t>(c)]).epsilon(1e-10));
}

TEST_CASE("constancy report on the linear map") {
  DAMap f(a0());
  ConstancyReport rep = periodic_data_constancy(f, 3);
  CHECK(rep.spreads[0] <= 1e-10);
  CHECK(rep.spreads[1] <= 1e-10);
  CHECK(rep.spreads[2] <= 1e-10);
  CHECK(rep.constant[0]);
  CHECK(rep.constant[1]);
  CHECK(rep.constant[2]);
  CHECK(rep.predicted_absolute_continuity);
  CHECK(rep.predicted_c1_rigidity);
  // orbits of minimal period 1, 2, 3: 1 + 6 + 30 = 37
  CHECK(rep.orbits.size() == 37);
}

TEST_CASE("generic shear breaks constancy") {
  DAMap f = shear_map(0.05);
  ConstancyReport rep = periodic_data_constancy(f, 3);
  bool some_variable = !rep.constant[0] || !rep.constant[1] || !rep.constant[2];
  CHECK(some_variable);
  CHECK_FALSE(rep.predicted_c1_rigidity);
}

TEST_CASE("continuation preserves the orbit count at small amplitude") {
  DAMap f = shear_map(0.01);
  ConstancyReport lin = periodic_data_constancy(DAMap(a0()), 3);
  ConstancyReport per = periodic_data_constancy(f, 3);
  CHECK(lin.orbits.size() == per.orbits.size());
}

TEST_CASE("exponent data converges to linear as eps -> 0") {
  double prev = 1e9;
  for (double eps : {0.04, 0.02, 0.01, 0.005}) {
    DAMap f = shear_map(eps);
    PeriodicOrbit orbit = continue_periodic_orbit(f, TorusPoint(), 1);
    PeriodicData d = periodic_data(f, orbit);
    LinearAnosov a = a0();
    double err = 0;
    for (int c = 0; c < 3; ++c)
      err = std::max(err, std::abs(d.exponents[static_cast<std::size_t>(c)] -
                                   a.exponents[static_cast<std::size_t>(c)]));
    CHECK(err < prev + 1e-12);  // monotone decay along the sweep
    prev = err;
  }
  CHECK(prev <= 0.05);
}

TEST_CASE("volume preservation at periodic points") {
  DAMap f = shear_map(0.05);
  for (const auto& p : linear_periodic_points(a0(), 2)) {
    PeriodicOrbit orbit = continue_periodic_orbit(f, p, 2);
    TorusPoint x = orbit.representative;
    Mat3 prod = Mat3::Identity();
    for (int i = 0; i < 2; ++i) {
      Mat3 df;
      f.apply_with_derivative(x, df);
      prod = df * prod;
    }
    CHECK(std::abs(std::abs(prod.determinant()) - 1.0) <= 1e-8);
  }
}
