#include <doctest.h>

#include <cmath>

#include "dav/intlinalg.hpp"
#include "dav/rng.hpp"
#include "dav/torus.hpp"

using namespace dav;

namespace {

IntMatrix3 a0() { return IntMatrix3::from_rows({3, 2, 1, 2, 2, 1, 1, 1, 1}); }

// frozen high-precision roots of x^3 - 6x^2 + 5x - 1 (bisection oracle)
constexpr double kMuSS = 0.30797852836990414;
constexpr double kMuWS = 0.64310413210779060;
constexpr double kMuU = 5.04891733952230570;

}  // namespace

TEST_CASE("wrap reduces mod 1") {
  TorusPoint p = wrap(Vec3(0.2, 0.3, 0.4));
  CHECK(p[0] == doctest::Approx(0.2));
  CHECK(p[1] == doctest::Approx(0.3));
  CHECK(p[2] == doctest::Approx(0.4));

  TorusPoint q = wrap(Vec3(1.2, -0.3, 2.0));
  CHECK(q[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(q[2] == 0.0);

  // negative epsilon snaps to zero instead of landing at 1 - eps
  TorusPoint r = wrap(Vec3(-1e-16, 0.0, 0.0));
  CHECK(r[0] == 0.0);

  CHECK_THROWS_AS(wrap(Vec3(std::nan(""), 0, 0)), Error);
  CHECK_THROWS_AS(wrap(Vec3(std::numeric_limits<double>::infinity(), 0, 0)), Error);
}

TEST_CASE("wrap matches exact dyadic arithmetic") {
  // oracle: for x = num / 2^k the reduction is (num mod 2^k) / 2^k, exactly
  CounterRng rng(7, "wrap_dyadic");
  for (int trial = 0; trial < 200; ++trial) {
    int k = 1 + static_cast<int>(rng.next_u64() % 40);
    std::int64_t den = std::int64_t(1) << k;
    std::int64_t num = static_cast<std::int64_t>(rng.next_u64() % (1ull << 50)) - (1ll << 49);
    double x = static_cast<double>(num) / static_cast<double>(den);
    std::int64_t m = ((num % den) + den) % den;
    double expect = static_cast<double>(m) / static_cast<double>(den);
    TorusPoint p = wrap(Vec3(x, 0, 0));
    // the wrap snap can move values within 1e-15 of 1 to 0
    double diff = std::abs(p[0] - expect);
    diff = std::min(diff, std::abs(diff - 1.0));
    CHECK(diff <= 1e-14);
  }
}

TEST_CASE("wrap is deck-invariant") {
  CounterRng rng(11, "wrap_deck");
  for (int trial = 0; trial < 100; ++trial) {
    Vec3 v = 10.0 * (rng.cube_vector() - Vec3::Constant(0.5));
    Vec3 z(static_cast<double>(static_cast<int>(rng.next_u64() % 9)) - 4,
           static_cast<double>(static_cast<int>(rng.next_u64() % 9)) - 4,
           static_cast<double>(static_cast<int>(rng.next_u64() % 9)) - 4);
    TorusPoint a = wrap(v);
    TorusPoint b = wrap(v + z);
    CHECK(torus_distance(a, b) <= 1e-12);
  }
}

TEST_CASE("min_displacement realizes the torus distance") {
  TorusPoint p = wrap(Vec3(0, 0, 0));
  TorusPoint q = wrap(Vec3(0.9, 0, 0));
  Vec3 d = min_displacement(p, q);
  CHECK(d[0] == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(d[1] == 0.0);
  CHECK(d[2] == 0.0);

  CHECK(min_displacement(p, p).norm() == 0.0);

  // brute force over the 27 nearest deck translates
  CounterRng rng(3, "mindisp");
  for (int trial = 0; trial < 200; ++trial) {
    TorusPoint a = rng.torus_point();
    TorusPoint b = rng.torus_point();
    Vec3 m = min_displacement(a, b);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int k = -1; k <= 1; ++k)
          best = std::min(best, (b.coords() + Vec3(i, j, k) - a.coords()).norm());
    CHECK(m.norm() == doctest::Approx(best).epsilon(1e-12));
    CHECK(m[0] >= -0.5);
    CHECK(m[0] < 0.5);
  }
}

TEST_CASE("min_displacement antisymmetry off the boundary") {
  CounterRng rng(5, "mindisp_anti");
  for (int trial = 0; trial < 200; ++trial) {
    TorusPoint a = rng.torus_point();
    TorusPoint b = rng.torus_point();
    Vec3 ab = min_displacement(a, b);
    bool boundary = false;
    for (int c = 0; c < 3; ++c) boundary = boundary || std::abs(ab[c] + 0.5) < 1e-12;
    if (boundary) continue;
    Vec3 ba = min_displacement(b, a);
    CHECK((ab + ba).norm() <= 1e-12);
  }
}

TEST_CASE("integer matrix arithmetic is exact") {
  IntMatrix3 m = a0();
  CHECK(m.det() == 1);
  auto cp = m.char_poly();
  // x^3 - 6x^2 + 5x - 1
  CHECK(cp[2] == -6);
  CHECK(cp[1] == 5);
  CHECK(cp[0] == -1);

  IntMatrix3 inv = m.unimodular_inverse();
  CHECK(m * inv == IntMatrix3::identity());
  CHECK(inv * m == IntMatrix3::identity());
}

TEST_CASE("analyze_linear on the reference matrix") {
  LinearAnosov a = analyze_linear(a0());
  CHECK(a.eigenvalues[0] == doctest::Approx(kMuSS).epsilon(1e-14));
  CHECK(a.eigenvalues[1] == doctest::Approx(kMuWS).epsilon(1e-14));
  CHECK(a.eigenvalues[2] == doctest::Approx(kMuU).epsilon(1e-14));
  CHECK(a.exponents[0] == doctest::Approx(std::log(kMuSS)).epsilon(1e-13));
  CHECK(a.exponents[1] == doctest::Approx(std::log(kMuWS)).epsilon(1e-13));
  CHECK(a.exponents[2] == doctest::Approx(std::log(kMuU)).epsilon(1e-13));
  CHECK(std::abs(a.exponents[0] + a.exponents[1] + a.exponents[2]) <= 1e-12);
  CHECK(a.splitting == SplittingCase::TwoContracting);

  Mat3 mr = a.matrix.to_real();
  for (int i = 0; i < 3; ++i) {
    CHECK((mr * a.eigenvectors[i] - a.eigenvalues[i] * a.eigenvectors[i]).norm() <= 1e-12);
    CHECK(a.eigenvectors[i].norm() == doctest::Approx(1.0).epsilon(1e-14));
  }

  // inverse matrix flips the splitting case
  LinearAnosov ainv = analyze_linear(a0().unimodular_inverse());
  CHECK(ainv.splitting == SplittingCase::TwoExpanding);
  CHECK(ainv.exponents[2] == doctest::Approx(-a.exponents[0]).epsilon(1e-12));
}

TEST_CASE("analyze_linear rejections name the violated hypothesis") {
  CHECK_THROWS_AS(analyze_linear(IntMatrix3::identity()), NotHyperbolic);
  CHECK_THROWS_AS(analyze_linear(IntMatrix3::from_rows({2, 0, 0, 0, 1, 0, 0, 0, 1})),
                  NotUnimodular);
  // char poly x^3 - x^2 - x - 1: one real root and a complex pair
  CHECK_THROWS_AS(analyze_linear(IntMatrix3::from_rows({0, 1, 0, 0, 0, 1, 1, 1, 1})), NotSplit);
}

TEST_CASE("integer diagonalization reproduces the determinant") {
  CounterRng rng(13, "snf");
  for (int trial = 0; trial < 50; ++trial) {
    IntMatrix3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        m.a[i][j] = static_cast<std::int64_t>(rng.next_u64() % 21) - 10;
    IntDiagonalization d = diagonalize_over_z(m);
    CHECK(d.diag[0] * d.diag[1] * d.diag[2] == std::abs(m.det()));
    CHECK(std::abs(d.right.det()) == 1);
  }
}
