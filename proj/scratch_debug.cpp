// scratch: diagnose certification at eps=0.05 and the conjugacy residual floor
#include <cstdio>

#include "dav/certify.hpp"
#include "dav/cocycle.hpp"
#include "dav/conjugacy.hpp"
#include "dav/rng.hpp"

using namespace dav;

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

// truncated series oracle for u in eigencoordinates
Vec3 u_series(const DAMap& f, const Vec3& x, int terms) {
  const LinearAnosov& A = f.linear();
  const Mat3 Tinv = A.eigenbasis_inverse();
  const Mat3 Areal = A.matrix.to_real();
  auto g_at = [&](const TorusPoint& p) {
    Vec3 xl = p.lift();
    return Vec3(Tinv * (f.apply_lift(xl) - Areal * xl));
  };
  Vec3 u = Vec3::Zero();
  // expanding component: u = sum mu^-(k+1) g(f^k x)
  {
    TorusPoint p = wrap(x);
    double scale = 1.0 / A.eigenvalues[2];
    for (int k = 0; k < terms; ++k) {
      u[2] += scale * g_at(p)[2];
      scale /= A.eigenvalues[2];
      p = f.apply(p);
    }
  }
  // contracting components: u = -sum_{k>=1} mu^{k-1} g(f^-k x)
  for (int c = 0; c < 2; ++c) {
    TorusPoint p = wrap(x);
    double scale = 1.0;
    for (int k = 1; k <= terms; ++k) {
      p = f.invert(p);
      u[c] -= scale * g_at(p)[c];
      scale *= A.eigenvalues[c];
    }
  }
  return u;
}

int main() {
  DAMap f = shear_map(0.05);
  LinearAnosov A = a0();

  std::printf("eigencoords of e0: ");
  Vec3 c = A.eigenbasis_inverse() * Vec3(1, 0, 0);
  std::printf("%g %g %g\n", c[0], c[1], c[2]);

  // certification diagnostics
  for (int grid : {6, 8}) {
    PHCertificate cert = verify_partial_hyperbolicity(f, 8, grid);
    std::printf("grid %d: verified=%d reason='%s' rates: ss<=%.4f c=[%.4f,%.4f] u>=%.4f\n",
                grid, cert.verified, cert.violation_reason.c_str(),
                std::log(cert.rate_strong_max), std::log(cert.rate_center_min),
                std::log(cert.rate_center_max), std::log(cert.rate_unstable_min));
    if (cert.first_violation)
      std::printf("  violation at %d %d %d\n", (*cert.first_violation)[0],
                  (*cert.first_violation)[1], (*cert.first_violation)[2]);
  }

  // oracle check: residual of the series u evaluated directly
  CounterRng rng(1, "dbg");
  const Mat3 T = A.eigenbasis();
  const Mat3 Areal = A.matrix.to_real();
  double sup_series_resid = 0, supu = 0;
  for (int i = 0; i < 200; ++i) {
    Vec3 x = rng.cube_vector();
    Vec3 ux = T * u_series(f, x, 40);
    Vec3 ufx = T * u_series(f, wrap(f.apply_lift(x)).lift(), 40);
    // careful: u at f(x) must use the same torus point
    Vec3 lhs = Areal * (x + ux);
    Vec3 rhs = f.apply_lift(x) + ufx;
    sup_series_resid = std::max(sup_series_resid, (lhs - rhs).norm());
    supu = std::max(supu, ux.norm());
  }
  std::printf("series oracle: sup residual %.3e  sup|u| %.3e\n", sup_series_resid, supu);

  // grid solve at several resolutions: measure the residual scaling
  for (int res : {16, 32, 64}) {
    for (int order : {1, 3}) {
      ConjugacyField h = solve_semiconjugacy(f, res, 1e-13, 800, order, 0);
      ResidualStats st = conjugacy_residual(h, f, 30000, 5, 0);
      // distance grid-u vs series-u at random points
      double dist = 0;
      CounterRng r2(2, "dbg2");
      for (int i = 0; i < 100; ++i) {
        Vec3 x = r2.cube_vector();
        dist = std::max(dist, (h.displacement(wrap(x)) - T * u_series(f, x, 40)).norm());
      }
      std::printf("res %3d order %d: iters %d sup_resid %.3e mean %.3e |u|s=%.4f dist-to-series %.3e\n",
                  res, order, h.iterations, st.sup, st.mean, h.sup_displacement(), dist);
    }
  }
  return 0;
}
