#include <doctest.h>

#include <cmath>

#include "dav/disintegration.hpp"

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

ConditionalHistogram uniform_hist(int bins, std::int64_t count = 1000000000) {
  ConditionalHistogram h;
  h.cell = 0;
  h.bins = bins;
  h.raw_count = count;
  h.empty = false;
  h.mass.assign(static_cast<std::size_t>(bins), 1.0 / bins);
  return h;
}

ConditionalHistogram atomic_hist(int bins) {
  ConditionalHistogram h;
  h.cell = 0;
  h.bins = bins;
  h.raw_count = 1000000000;
  h.empty = false;
  h.mass.assign(static_cast<std::size_t>(bins), 0.0);
  h.mass[static_cast<std::size_t>(bins / 3)] = 1.0;
  return h;
}

// binomial cascade: mass of the bin with binary digits b_1..b_m is
// prod(b_i ? 0.3 : 0.7) -- the analytic singular-continuous fixture
ConditionalHistogram cascade_hist(int depth) {
  int bins = 1 << depth;
  ConditionalHistogram h;
  h.cell = 0;
  h.bins = bins;
  h.raw_count = 1000000000;
  h.empty = false;
  h.mass.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    double m = 1.0;
    for (int d = depth - 1; d >= 0; --d) m *= ((b >> d) & 1) ? 0.3 : 0.7;
    h.mass[static_cast<std::size_t>(b)] = m;
  }
  return h;
}

// exact CDF-based KS oracle for the cascade at a given depth
double cascade_ks_oracle(int depth) {
  int bins = 1 << depth;
  auto h = cascade_hist(depth);
  double cum = 0, d = 0;
  for (int b = 0; b < bins; ++b) {
    d = std::max(d, std::abs(cum - static_cast<double>(b) / bins));
    cum += h.mass[static_cast<std::size_t>(b)];
    d = std::max(d, std::abs(cum - static_cast<double>(b + 1) / bins));
  }
  return d;
}

}  // namespace

TEST_CASE("histogram masses are normalized and refinement-consistent") {
  DAMap f(a0());
  FoliationBundles b = compute_bundles(f, 8, 50);
  FoliatedBox box = build_foliated_box(f, b, wrap(Vec3(0.25, 0.25, 0.25)), 0.08, 0.08, 0.15,
                                       2, 2, 2e-3);
  auto hist = estimate_conditionals(box, 200000, 16, 7, 10);
  REQUIRE(hist.size() == static_cast<std::size_t>(box.cell_count()));
  for (const auto& h : hist) {
    double sum = 0;
    for (double m : h.mass) {
      CHECK(m >= 0);
      sum += m;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK_FALSE(h.empty);
  }
  // merging adjacent bins reproduces the coarser histogram exactly
  auto coarse = estimate_conditionals(box, 200000, 8, 7, 10);
  for (std::size_t c = 0; c < hist.size(); ++c) {
    ConditionalHistogram merged = merge_bins(hist[c]);
    REQUIRE(merged.bins == coarse[c].bins);
    for (int bn = 0; bn < merged.bins; ++bn)
      CHECK(merged.mass[static_cast<std::size_t>(bn)] ==
            doctest::Approx(coarse[c].mass[static_cast<std::size_t>(bn)]).epsilon(1e-12));
  }
}

TEST_CASE("insufficient samples raise") {
  DAMap f(a0());
  FoliationBundles b = compute_bundles(f, 8, 50);
  FoliatedBox box = build_foliated_box(f, b, wrap(Vec3(0.25, 0.25, 0.25)), 0.08, 0.08, 0.15,
                                       2, 2, 2e-3);
  CHECK_THROWS_AS(estimate_conditionals(box, 100, 8, 7, 100), InsufficientSamples);
}

TEST_CASE("linear box conditionals pass the uniformity gate") {
  DAMap f(a0());
  FoliationBundles b = compute_bundles(f, 8, 50);
  FoliatedBox box = build_foliated_box(f, b, wrap(Vec3(0.25, 0.25, 0.25)), 0.1, 0.1, 0.2, 3,
                                       3, 2e-3);
  int finest = 32;
  auto fine = estimate_conditionals(box, 1000000, finest, 11, 50);
  std::vector<std::vector<ConditionalHistogram>> levels(3);
  levels[2] = fine;
  for (int l = 1; l >= 0; --l)
    for (const auto& h : levels[static_cast<std::size_t>(l) + 1])
      levels[static_cast<std::size_t>(l)].push_back(merge_bins(h));
  DisintegrationReport rep = classify_disintegration(levels);
  CHECK(rep.verdict == Verdict::LebesgueLike);
  for (const auto& st : rep.levels) CHECK(st.uniform_pass);
}

TEST_CASE("classifier identifies the synthetic fixtures") {
  SUBCASE("atomic") {
    std::vector<std::vector<ConditionalHistogram>> levels = {
        {atomic_hist(8)}, {atomic_hist(16)}, {atomic_hist(32)}};
    CHECK(classify_disintegration(levels).verdict == Verdict::AtomicLike);
  }
  SUBCASE("cascade is singular-continuous") {
    std::vector<std::vector<ConditionalHistogram>> levels = {
        {cascade_hist(3)}, {cascade_hist(4)}, {cascade_hist(5)}};
    DisintegrationReport rep = classify_disintegration(levels);
    CHECK(rep.verdict == Verdict::SingularContinuousLike);
    // analytic oracle: max bin mass 0.7^depth, KS grows past any critical value
    CHECK(rep.levels[0].max_bin_mean == doctest::Approx(std::pow(0.7, 3)).epsilon(1e-12));
    CHECK(rep.levels[1].max_bin_mean == doctest::Approx(std::pow(0.7, 4)).epsilon(1e-12));
    CHECK(rep.levels[2].max_bin_mean == doctest::Approx(std::pow(0.7, 5)).epsilon(1e-12));
    CHECK(rep.levels[0].ks_max == doctest::Approx(cascade_ks_oracle(3)).epsilon(1e-12));
  }
  SUBCASE("exact uniform is lebesgue") {
    std::vector<std::vector<ConditionalHistogram>> levels = {
        {uniform_hist(8)}, {uniform_hist(16)}, {uniform_hist(32)}};
    CHECK(classify_disintegration(levels).verdict == Verdict::LebesgueLike);
  }
  SUBCASE("verdict is a pure function of the statistics") {
    std::vector<std::vector<ConditionalHistogram>> levels = {
        {cascade_hist(3)}, {cascade_hist(4)}, {cascade_hist(5)}};
    auto v1 = classify_disintegration(levels).verdict;
    auto v2 = classify_disintegration(levels).verdict;
    CHECK(v1 == v2);
  }
}

TEST_CASE("window arithmetic on the exact uniform fixture") {
  // uniform conditional on [-L, L], window of 0.6 of the leaf: every point
  // carries mass exactly 0.6, so the whole box is concentrated
  const double L = 0.2;
  ConditionalHistogram h = uniform_hist(64);
  for (double center : {-0.2, -0.1, 0.0, 0.13, 0.2}) {
    CHECK(window_mass(h, L, center, 0.6 * 2 * L) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(window_mass(h, L, center, 2 * L) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("concentration profile on the linear box") {
  DAMap f(a0());
  FoliationBundles b = compute_bundles(f, 8, 50);
  FoliatedBox box = build_foliated_box(f, b, wrap(Vec3(0.25, 0.25, 0.25)), 0.08, 0.08, 0.15,
                                       2, 2, 2e-3);
  const double L2 = 2 * 0.15;  // full leaf length
  ConcentrationProfile prof =
      concentration_profile(box, 400000, {0.3 * L2, 0.6 * L2, 0.9 * L2, L2}, 13);
  // whole-leaf window: always concentrated
  CHECK(prof.volume_fraction.back() == doctest::Approx(1.0).epsilon(1e-12));
  // monotone within 2 standard errors
  for (std::size_t i = 1; i < prof.volume_fraction.size(); ++i) {
    double slack = 2 * (prof.standard_error[i] + prof.standard_error[i - 1]);
    CHECK(prof.volume_fraction[i] >= prof.volume_fraction[i - 1] - slack);
  }
  // 0.6-of-leaf window on a uniform law: mass ~ 0.6, so most points pass
  CHECK(prof.volume_fraction[1] >= 0.4);
}

TEST_CASE("birkhoff discrepancy") {
  SUBCASE("mixing linear orbit equidistributes") {
    DAMap f(a0());
    BirkhoffReport rep = birkhoff_discrepancy(f, wrap(Vec3(0.1234, 0.5678, 0.9012)), 100000,
                                              20);
    CHECK(rep.discrepancy <= 0.02);
    CHECK_FALSE(rep.non_generic);
  }
  SUBCASE("fixed point is flagged non-generic") {
    DAMap f(a0());
    BirkhoffReport rep = birkhoff_discrepancy(f, TorusPoint(), 1000, 10);
    CHECK(rep.discrepancy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.non_generic);
  }
  SUBCASE("dictionary excludes the constant character") {
    auto dict = birkhoff_dictionary(30);
    for (const auto& k : dict) CHECK(k != Eigen::Vector3i::Zero());
    CHECK(dict.size() == 30);
  }
}

TEST_CASE("perturbed box still normalizes and classifies deterministically") {
  DAMap f = shear_map(0.05);
  FoliationBundles b = compute_bundles(f, 24, 400);
  FoliatedBox box = build_foliated_box(f, b, wrap(Vec3(0.25, 0.25, 0.25)), 0.08, 0.08, 0.15,
                                       2, 2, 2e-3);
  auto h1 = estimate_conditionals(box, 200000, 16, 7, 10, 1);
  auto h8 = estimate_conditionals(box, 200000, 16, 7, 10, 8);
  for (std::size_t c = 0; c < h1.size(); ++c) {
    CHECK(h1[c].mass == h8[c].mass);
    CHECK(h1[c].raw_count == h8[c].raw_count);
  }
}
