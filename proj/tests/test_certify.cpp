#include <doctest.h>

#include <cmath>

#include "dav/certify.hpp"

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

TEST_CASE("linear map certifies with rates equal to the exponents") {
  DAMap f(a0());
  PHCertificate cert = verify_partial_hyperbolicity(f, 8, 6);
  CHECK(cert.verified);
  CHECK(cert.splitting == SplittingCase::TwoContracting);
  LinearAnosov a = a0();
  CHECK(std::log(cert.rate_strong_max) == doctest::Approx(a.exponents[0]).epsilon(1e-10));
  CHECK(std::log(cert.rate_center_min) == doctest::Approx(a.exponents[1]).epsilon(1e-10));
  CHECK(std::log(cert.rate_center_max) == doctest::Approx(a.exponents[1]).epsilon(1e-10));
  CHECK(std::log(cert.rate_unstable_min) == doctest::Approx(a.exponents[2]).epsilon(1e-10));
}

TEST_CASE("small shear certifies with rates near linear") {
  DAMap f = shear_map(0.01);
  PHCertificate cert = verify_partial_hyperbolicity(f, 8, 8);
  CHECK(cert.verified);
  LinearAnosov a = a0();
  // empirical perturbation bound: rates move by O(eps)
  CHECK(std::abs(std::log(cert.rate_center_min) - a.exponents[1]) < 0.1);
  CHECK(std::abs(std::log(cert.rate_center_max) - a.exponents[1]) < 0.1);
  CHECK(std::abs(std::log(cert.rate_unstable_min) - a.exponents[2]) < 0.1);
  CHECK(std::abs(std::log(cert.rate_strong_max) - a.exponents[0]) < 0.1);
}

TEST_CASE("huge shear fails certification with a located violation") {
  DAMap f = shear_map(10.0);
  PHCertificate cert = verify_partial_hyperbolicity(f, 4, 8);
  CHECK_FALSE(cert.verified);
  CHECK_THROWS_AS(require_certified(cert), CertificationFailed);
}

TEST_CASE("certification is deterministic across worker counts") {
  DAMap f = shear_map(0.05);
  PHCertificate c1 = verify_partial_hyperbolicity(f, 6, 6, {0.3, 0.3, 0.3}, 1);
  PHCertificate c8 = verify_partial_hyperbolicity(f, 6, 6, {0.3, 0.3, 0.3}, 8);
  CHECK(c1.verified == c8.verified);
  CHECK(c1.rate_strong_max == c8.rate_strong_max);
  CHECK(c1.rate_center_min == c8.rate_center_min);
  CHECK(c1.rate_center_max == c8.rate_center_max);
  CHECK(c1.rate_unstable_min == c8.rate_unstable_min);
}
