#include <doctest.h>

#include <cmath>

#include "dav/damap.hpp"
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

DAMap twist_map(double theta, double radius = 0.2) {
  TwistPerturbation t;
  t.frame = Mat3::Identity();
  t.plane_a = 0;
  t.plane_b = 1;
  t.center = wrap(Vec3(0.5, 0.5, 0.5));
  t.radius = radius;
  t.max_angle = theta;
  return DAMap(a0(), {t});
}

}  // namespace

TEST_CASE("linear map evaluation") {
  DAMap f(a0());
  CHECK(torus_distance(f.apply(TorusPoint()), TorusPoint()) == 0.0);  // origin fixed

  // A0 * (.5,.5,.5) = (3, 2.5, 1.5) -> (0, .5, .5)
  TorusPoint y = f.apply(wrap(Vec3(0.5, 0.5, 0.5)));
  CHECK(torus_distance(y, wrap(Vec3(0.0, 0.5, 0.5))) <= 1e-15);
}

TEST_CASE("shear evaluation matches the hand formula") {
  DAMap f = shear_map(0.05);
  // shear moves x0 by 0.05*sin(2 pi 0.25) = 0.05, then A0 acts
  TorusPoint y = f.apply(wrap(Vec3(0.0, 0.25, 0.0)));
  Vec3 expect = a0().matrix.apply(Vec3(0.05, 0.25, 0.0));
  CHECK(torus_distance(y, wrap(expect)) <= 1e-15);
}

TEST_CASE("shear jacobian determinant is one up to rounding of the products") {
  // the shear primitive itself is unit-triangular, so the analytic
  // determinant is exactly 1; stripping the linear part numerically leaves
  // only the rounding of two 3x3 products
  DAMap f = shear_map(0.37);
  Mat3 a_inv = a0().matrix.unimodular_inverse().to_real();
  CounterRng rng(21, "shear_det");
  for (int i = 0; i < 100; ++i) {
    TorusPoint x = rng.torus_point();
    Mat3 phi_jac = a_inv * f.derivative(x);
    CHECK(std::abs(phi_jac.determinant() - 1.0) <= 4e-15);
  }
}

TEST_CASE("twist jacobian determinant within 1e-12") {
  DAMap f = twist_map(0.8);
  CounterRng rng(22, "twist_det");
  for (int i = 0; i < 100000; ++i) {
    TorusPoint x = rng.torus_point();
    CHECK(std::abs(std::abs(f.derivative(x).determinant()) - 1.0) <= 1e-12);
  }
}

TEST_CASE("derivative matches central finite differences") {
  for (const DAMap& f : {shear_map(0.05), twist_map(0.5)}) {
    CounterRng rng(23, "fd");
    const double h = 1e-6;
    for (int i = 0; i < 50; ++i) {
      Vec3 x = rng.cube_vector();
      Mat3 jac = f.derivative(wrap(x));
      for (int c = 0; c < 3; ++c) {
        Vec3 e = Vec3::Zero();
        e[c] = h;
        Vec3 fd = (f.apply_lift(x + e) - f.apply_lift(x - e)) / (2 * h);
        CHECK((fd - jac.col(c)).norm() <= 1e-6);
      }
    }
  }
}

TEST_CASE("inversion round trips") {
  SUBCASE("linear case uses the exact integer inverse") {
    DAMap f(a0());
    CounterRng rng(24, "inv_lin");
    for (int i = 0; i < 100; ++i) {
      TorusPoint y = rng.torus_point();
      TorusPoint x = f.invert(y);
      Vec3 expect = a0().matrix.unimodular_inverse().apply(y.lift());
      CHECK(torus_distance(x, wrap(expect)) <= 1e-12);
    }
  }
  SUBCASE("perturbed round trip within 1e-10") {
    for (const DAMap& f : {shear_map(0.05), twist_map(0.7)}) {
      CounterRng rng(25, "inv_rt");
      for (int i = 0; i < 10000; ++i) {
        TorusPoint y = rng.torus_point();
        CHECK(torus_distance(f.apply(f.invert(y)), y) <= 1e-10);
        CHECK(torus_distance(f.invert(f.apply(y)), y) <= 1e-10);
      }
    }
  }
  SUBCASE("twist with zero angle is the linear inverse") {
    DAMap f = twist_map(0.0);
    CounterRng rng(26, "inv_zero");
    for (int i = 0; i < 100; ++i) {
      TorusPoint y = rng.torus_point();
      Vec3 expect = a0().matrix.unimodular_inverse().apply(y.lift());
      CHECK(torus_distance(f.invert(y), wrap(expect)) <= 1e-12);
    }
  }
}

TEST_CASE("the lift is in the homotopy class of the linear part") {
  for (const DAMap& f : {shear_map(0.05), twist_map(0.5)}) {
    CounterRng rng(27, "homotopy");
    Mat3 a_real = a0().matrix.to_real();
    for (int i = 0; i < 100; ++i) {
      Vec3 x = rng.cube_vector();
      Vec3 z(static_cast<double>(static_cast<int>(rng.next_u64() % 7)) - 3,
             static_cast<double>(static_cast<int>(rng.next_u64() % 7)) - 3,
             static_cast<double>(static_cast<int>(rng.next_u64() % 7)) - 3);
      Vec3 lhs = f.apply_lift(x + z);
      Vec3 rhs = f.apply_lift(x) + a_real * z;
      CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
    }
  }
}

TEST_CASE("perturbation validation") {
  ShearPerturbation bad;
  bad.target = 0;
  bad.frequency = Eigen::Vector3i(1, 0, 0);  // reads its own target
  bad.amplitude = 0.1;
  CHECK_THROWS_AS(DAMap(a0(), {bad}), Error);

  TwistPerturbation big;
  big.radius = 0.6;  // cannot embed
  big.max_angle = 0.1;
  CHECK_THROWS_AS(DAMap(a0(), {big}), Error);

  TwistPerturbation plane;
  plane.radius = 0.2;
  plane.plane_a = 1;
  plane.plane_b = 1;
  CHECK_THROWS_AS(DAMap(a0(), {plane}), Error);
}

TEST_CASE("twist is supported in the ball") {
  DAMap f = twist_map(0.9, 0.15);
  DAMap lin(a0());
  CounterRng rng(28, "twist_supp");
  for (int i = 0; i < 200; ++i) {
    TorusPoint x = rng.torus_point();
    Vec3 d = min_displacement(wrap(Vec3(0.5, 0.5, 0.5)), x);
    if (d.norm() >= 0.15) {
      CHECK(torus_distance(f.apply(x), lin.apply(x)) <= 1e-15);
    }
  }
}
