#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dav/conjugacy.hpp"
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

TEST_CASE("linear map solves to u = 0 in one iteration") {
  DAMap f(a0());
  ConjugacyField h = solve_semiconjugacy(f, 16, 1e-12, 10);
  CHECK(h.iterations == 1);
  CHECK(h.sup_displacement() == 0.0);
  ResidualStats res = conjugacy_residual(h, f, 1000, 5);
  CHECK(res.sup == 0.0);
}

TEST_CASE("shear solve certifies a small residual") {
  DAMap f = shear_map(0.05);
  ConjugacyField h = solve_semiconjugacy(f, 32, 1e-12, 500, 1);
  ResidualStats res = conjugacy_residual(h, f, 20000, 17);
  // 32^3 grid with trilinear interpolation: coarse but convergent
  CHECK(res.sup <= 5e-4);
  CHECK(h.final_sup_residual <= 1e-10);

  // the null baseline: an unsolved (zero) field has residual ~ sup|f - A|
  ConjugacyField zero = h;
  std::fill(zero.u.data().begin(), zero.u.data().end(), 0.0);
  ResidualStats base = conjugacy_residual(zero, f, 20000, 17);
  CHECK(base.sup >= 0.1);
  CHECK(base.sup == doctest::Approx(f.displacement_sup()).epsilon(0.05));
}

TEST_CASE("sup-change log decays geometrically") {
  DAMap f = shear_map(0.05);
  ConjugacyField h = solve_semiconjugacy(f, 16, 1e-12, 500, 1);
  LinearAnosov a = a0();
  double kappas[3] = {std::abs(a.eigenvalues[0]), std::abs(a.eigenvalues[1]),
                      1.0 / std::abs(a.eigenvalues[2])};
  for (int c = 0; c < 3; ++c) {
    const auto& log = h.sup_change_log[static_cast<std::size_t>(c)];
    REQUIRE(log.size() >= 3);
    for (std::size_t i = 2; i + 1 < log.size(); ++i) {
      if (log[i] < 1e-14) break;  // at the floating noise floor
      CHECK(log[i + 1] <= kappas[c] * log[i] * 1.05 + 1e-15);
    }
  }
}

TEST_CASE("distance to identity scales linearly in amplitude") {
  double prev_c = -1;
  for (double eps : {0.01, 0.02, 0.05}) {
    DAMap f = shear_map(eps);
    ConjugacyField h = solve_semiconjugacy(f, 24, 1e-12, 500, 1);
    double c_emp = h.sup_displacement() / f.displacement_sup();
    if (prev_c > 0) CHECK(std::abs(c_emp - prev_c) / prev_c <= 0.10);
    prev_c = c_emp;
  }
}

TEST_CASE("naturality: reordered commuting primitives give the same field") {
  // shears on distinct targets whose phases ignore each other's output
  ShearPerturbation s1;
  s1.target = 0;
  s1.frequency = Eigen::Vector3i(0, 0, 1);
  s1.amplitude = 0.02;
  ShearPerturbation s2;
  s2.target = 1;
  s2.frequency = Eigen::Vector3i(0, 0, 1);
  s2.amplitude = 0.015;
  DAMap f12(a0(), {s1, s2});
  DAMap f21(a0(), {s2, s1});
  ConjugacyField h12 = solve_semiconjugacy(f12, 16, 1e-13, 500, 1);
  ConjugacyField h21 = solve_semiconjugacy(f21, 16, 1e-13, 500, 1);
  double max_diff = 0;
  for (std::size_t i = 0; i < h12.u.data().size(); ++i)
    max_diff = std::max(max_diff, std::abs(h12.u.data()[i] - h21.u.data()[i]));
  CHECK(max_diff <= 1e-12);
}

TEST_CASE("fiber diagnostics") {
  DAMap lin(a0());
  ConjugacyField h = solve_semiconjugacy(lin, 16, 1e-12, 10);
  FiberReport rep = fiber_diagnostics(h, lin, 5000, 23);
  CHECK(rep.defect == 0.0);  // H = id exactly

  DAMap f = shear_map(0.02);
  ConjugacyField hf = solve_semiconjugacy(f, 32, 1e-12, 500, 1);
  FiberReport repf = fiber_diagnostics(hf, f, 5000, 23);
  CHECK(repf.defect <= 0.05);  // no collapse for a small Anosov perturbation
  CHECK(repf.close_pairs > 0);
  CHECK(repf.center_alignment >= 0.0);
  CHECK(repf.center_alignment <= 1.0);
}

TEST_CASE("geometric ratio check") {
  SUBCASE("linear case: ratio identically one") {
    DAMap f(a0());
    RatioCheckResult rc = geometric_ratio_check(f, 2, 5, 2.0, 100, {0.5, 1.0, 2.0, 4.0}, 7);
    CHECK(rc.found);
    CHECK(rc.m_estimate == 0.0);
    for (const auto& row : rc.rows) {
      CHECK(row.min_ratio == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(row.max_ratio == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("shear: a finite threshold exists") {
    DAMap f = shear_map(0.05);
    RatioCheckResult rc =
        geometric_ratio_check(f, 2, 5, 2.0, 200, {0.25, 1.0, 4.0, 16.0, 64.0}, 7);
    CHECK(rc.found);
    // ratios beyond the threshold stay within [1/C, C]
    bool seen = false;
    for (const auto& row : rc.rows) {
      if (row.separation >= rc.m_estimate) {
        CHECK(row.pass);
        seen = true;
      }
    }
    CHECK(seen);
  }
  SUBCASE("denominator guard skips degenerate pairs") {
    DAMap f(a0());
    RatioCheckResult rc = geometric_ratio_check(f, 2, 3, 2.0, 50, {1.0}, 7, 1e30);
    CHECK(rc.rows[0].skipped == 50);
    CHECK_FALSE(rc.found);
  }
}

TEST_CASE("field round-trips through the flat binary format") {
  DAMap f = shear_map(0.03);
  ConjugacyField h = solve_semiconjugacy(f, 16, 1e-12, 500, 1);
  ResidualStats res = conjugacy_residual(h, f, 1000, 3);
  auto path = std::filesystem::temp_directory_path() / "davlab_test_field.bin";
  save_conjugacy_field(path, h, res);
  ConjugacyField back = load_conjugacy_field(path);
  CHECK(back.resolution == h.resolution);
  CHECK(back.interpolation_order == h.interpolation_order);
  CHECK(back.iterations == h.iterations);
  CHECK(back.u.data() == h.u.data());  // bit-exact payload
  CHECK((back.eigenbasis - h.eigenbasis).norm() == 0.0);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".txt");
}
