#include "dav/certify.hpp"

#include <cmath>
#include <vector>

#include "dav/parallel.hpp"

namespace dav {

namespace {

constexpr int kBoundaryRays = 16;
constexpr int kRateBurnIn = 64;

// Orthonormalize the columns of m in place (modified Gram-Schmidt) and
// return the diagonal stretch factors.
Vec3 qr_step(Mat3& m) {
  Vec3 r;
  for (int c = 0; c < 3; ++c) {
    Vec3 v = m.col(c);
    for (int p = 0; p < c; ++p) v -= m.col(p).dot(m.col(c)) * m.col(p);
    r[c] = v.norm();
    m.col(c) = v / r[c];
  }
  return r;
}

struct PointResult {
  bool cone_ok = true;
  std::string reason;
  Vec3 rates;  // per-step log factors, ascending
};

// aperture of w relative to a 1D cone around the given axis
double aperture1(const Vec3& w, int axis) {
  double par = std::abs(w[axis]);
  double perp = std::sqrt(w.squaredNorm() - w[axis] * w[axis]);
  return par > 0 ? perp / par : std::numeric_limits<double>::infinity();
}

// aperture of w relative to a 2D cone around the plane complementary to `off`
double aperture2(const Vec3& w, int off) {
  double perp = std::abs(w[off]);
  double par = std::sqrt(w.squaredNorm() - w[off] * w[off]);
  return par > 0 ? perp / par : std::numeric_limits<double>::infinity();
}

bool cone1_invariant(const Mat3& p, int axis, double alpha) {
  int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
  for (int r = 0; r < kBoundaryRays; ++r) {
    double th = 2.0 * M_PI * r / kBoundaryRays;
    Vec3 v = Vec3::Zero();
    v[axis] = 1.0;
    v[o1] = alpha * std::cos(th);
    v[o2] = alpha * std::sin(th);
    if (!(aperture1(p * v, axis) < alpha)) return false;
  }
  return true;
}

bool cone2_invariant(const Mat3& p, int off, double alpha) {
  int a = (off + 1) % 3, b = (off + 2) % 3;
  for (int r = 0; r < kBoundaryRays; ++r) {
    double th = 2.0 * M_PI * r / kBoundaryRays;
    Vec3 v = Vec3::Zero();
    v[a] = std::cos(th);
    v[b] = std::sin(th);
    v[off] = alpha;
    if (!(aperture2(p * v, off) < alpha)) return false;
  }
  return true;
}

}  // namespace

PHCertificate verify_partial_hyperbolicity(const DAMap& f, int iterates, int grid_resolution,
                                           std::array<double, 3> apertures, int workers) {
  if (iterates < 1) throw Error("verify_partial_hyperbolicity: iterates must be >= 1");
  if (grid_resolution < 1) throw Error("verify_partial_hyperbolicity: grid must be >= 1");

  const LinearAnosov& A = f.linear();
  const Mat3& T = A.eigenbasis();
  const Mat3& Tinv = A.eigenbasis_inverse();
  const int res = grid_resolution;
  const int N = iterates;
  const std::size_t total = static_cast<std::size_t>(res) * res * res;

  // burn-in start frame: orthonormalized eigenbasis, dominant direction first
  Mat3 q0;
  q0.col(0) = A.eigenvectors[2];
  q0.col(1) = A.eigenvectors[1];
  q0.col(2) = A.eigenvectors[0];
  qr_step(q0);

  std::vector<PointResult> results(total);

  parallel_for(total, workers, [&](std::size_t idx) {
    int i = static_cast<int>(idx / (static_cast<std::size_t>(res) * res));
    int j = static_cast<int>((idx / res) % static_cast<std::size_t>(res));
    int k = static_cast<int>(idx % static_cast<std::size_t>(res));
    TorusPoint x0 = wrap(Vec3(static_cast<double>(i) / res, static_cast<double>(j) / res,
                              static_cast<double>(k) / res));
    PointResult& pr = results[idx];

    // forward product in eigenbasis coordinates
    Mat3 p_fwd = Mat3::Identity();
    {
      TorusPoint x = x0;
      for (int n = 0; n < N; ++n) {
        Mat3 df;
        f.apply_with_derivative(x, df);
        p_fwd = (Tinv * df * T) * p_fwd;
      }
    }
    // backward product: D(f^{-N})(x0) = B(y_N)^{-1} ... B(y_1)^{-1},
    // y_j the backward orbit, deepest factor leftmost
    Mat3 p_bwd = Mat3::Identity();
    {
      TorusPoint x = x0;
      for (int n = 0; n < N; ++n) {
        x = f.invert(x);
        Mat3 b = Tinv * f.derivative(x) * T;
        p_bwd = b.inverse() * p_bwd;
      }
    }

    if (!cone1_invariant(p_fwd, 2, apertures[2])) {
      pr.cone_ok = false;
      pr.reason = "unstable cone not invariant";
    } else if (!cone2_invariant(p_fwd, 0, apertures[1])) {
      pr.cone_ok = false;
      pr.reason = "center-unstable cone not invariant";
    } else if (!cone1_invariant(p_bwd, 0, apertures[0])) {
      pr.cone_ok = false;
      pr.reason = "strong stable cone not invariant under the inverse";
    } else if (!cone2_invariant(p_bwd, 2, apertures[1])) {
      pr.cone_ok = false;
      pr.reason = "center-stable cone not invariant under the inverse";
    }

    // growth factors along the orbit: QR-propagated frame, burn-in first
    TorusPoint x = x0;
    Mat3 q = q0;
    for (int n = 0; n < kRateBurnIn; ++n) {
      Mat3 df;
      f.apply_with_derivative(x, df);
      q = df * q;
      qr_step(q);
    }
    Vec3 sums = Vec3::Zero();
    for (int n = 0; n < N; ++n) {
      Mat3 df;
      f.apply_with_derivative(x, df);
      q = df * q;
      Vec3 r = qr_step(q);
      for (int c = 0; c < 3; ++c) sums[c] += std::log(r[c]);
    }
    Vec3 rates = sums / N;
    std::sort(rates.data(), rates.data() + 3);
    pr.rates = rates;
  });

  PHCertificate cert;
  cert.apertures = apertures;
  cert.iterates = N;
  cert.grid_resolution = res;
  cert.splitting = A.splitting;

  double l_max = -std::numeric_limits<double>::infinity();
  double c_min = std::numeric_limits<double>::infinity();
  double c_max = -std::numeric_limits<double>::infinity();
  double u_min = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> violation;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const PointResult& pr = results[idx];
    if (!pr.cone_ok && !violation) violation = idx;
    l_max = std::max(l_max, pr.rates[0]);
    c_min = std::min(c_min, pr.rates[1]);
    c_max = std::max(c_max, pr.rates[1]);
    u_min = std::min(u_min, pr.rates[2]);
  }
  cert.rate_strong_max = std::exp(l_max);
  cert.rate_center_min = std::exp(c_min);
  cert.rate_center_max = std::exp(c_max);
  cert.rate_unstable_min = std::exp(u_min);

  // strict hyperbolic ordering; the center must not straddle 1
  bool order_ok = cert.rate_strong_max < cert.rate_center_min &&
                  cert.rate_center_max < cert.rate_unstable_min &&
                  cert.rate_strong_max < 1.0 && cert.rate_unstable_min > 1.0;
  bool center_sign_ok = (A.splitting == SplittingCase::TwoContracting)
                            ? cert.rate_center_max < 1.0
                            : cert.rate_center_min > 1.0;

  if (violation) {
    std::size_t idx = *violation;
    int i = static_cast<int>(idx / (static_cast<std::size_t>(res) * res));
    int j = static_cast<int>((idx / res) % static_cast<std::size_t>(res));
    int k = static_cast<int>(idx % static_cast<std::size_t>(res));
    cert.first_violation = Eigen::Vector3i(i, j, k);
    cert.violation_reason = results[idx].reason;
    cert.verified = false;
  } else if (!order_ok || !center_sign_ok) {
    cert.verified = false;
    cert.violation_reason = "measured growth rates violate the strict splitting order";
  } else {
    cert.verified = true;
  }
  return cert;
}

void require_certified(const PHCertificate& cert) {
  if (!cert.verified) {
    Eigen::Vector3i gp = cert.first_violation.value_or(Eigen::Vector3i(-1, -1, -1));
    throw CertificationFailed("partial hyperbolicity certification failed: " +
                                  (cert.violation_reason.empty() ? std::string("unverified")
                                                                 : cert.violation_reason),
                              gp);
  }
}

}  // namespace dav
