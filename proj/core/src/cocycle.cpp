#include "dav/cocycle.hpp"

#include <cmath>
#include <vector>

#include "dav/parallel.hpp"
#include "dav/rng.hpp"

namespace dav {

namespace {

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

Mat3 start_frame(const LinearAnosov& a, bool backward) {
  Mat3 q;
  if (!backward) {
    q.col(0) = a.eigenvectors[2];
    q.col(1) = a.eigenvectors[1];
    q.col(2) = a.eigenvectors[0];
  } else {
    q.col(0) = a.eigenvectors[0];
    q.col(1) = a.eigenvectors[1];
    q.col(2) = a.eigenvectors[2];
  }
  qr_step(q);
  return q;
}

template <typename Step>
ExponentTriple run_cocycle(const TorusPoint& x0, int n, int burn_in, Mat3 q, Step step) {
  if (n < 1) throw Error("finite_time_exponents: n must be >= 1");
  TorusPoint x = x0;
  for (int i = 0; i < burn_in; ++i) {
    Mat3 df = step(x);
    q = df * q;
    qr_step(q);
  }
  Vec3 sums = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    Mat3 df = step(x);
    q = df * q;
    Vec3 r = qr_step(q);
    sums[0] += std::log(r[0]);
    sums[1] += std::log(r[1]);
    sums[2] += std::log(r[2]);
  }
  Vec3 e = sums / n;
  std::sort(e.data(), e.data() + 3);
  ExponentTriple t;
  t.low = e[0];
  t.mid = e[1];
  t.high = e[2];
  t.orbit_length = n;
  t.base = x0;
  return t;
}

}  // namespace

ExponentTriple finite_time_exponents(const DAMap& f, const TorusPoint& x, int n, int burn_in) {
  return run_cocycle(x, n, burn_in, start_frame(f.linear(), false), [&](TorusPoint& p) {
    Mat3 df;
    f.apply_with_derivative(p, df);
    return df;
  });
}

ExponentTriple finite_time_exponents_backward(const DAMap& f, const TorusPoint& x, int n,
                                              int burn_in) {
  return run_cocycle(x, n, burn_in, start_frame(f.linear(), true), [&](TorusPoint& p) {
    TorusPoint pre = f.invert(p);
    Mat3 df = f.derivative(pre).inverse();
    p = pre;
    return df;
  });
}

ExponentEstimate volume_average_exponents(const DAMap& f, int samples, int n,
                                          std::uint64_t seed, int burn_in, int workers) {
  if (samples < 2) throw Error("volume_average_exponents: samples must be >= 2");
  std::vector<ExponentTriple> triples(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t i) {
    CounterRng rng(seed, "cocycle", i);
    triples[i] = finite_time_exponents(f, rng.torus_point(), n, burn_in);
  });

  // reductions in sample order, independent of the worker count
  Vec3 mean = Vec3::Zero();
  for (const auto& t : triples) mean += Vec3(t.low, t.mid, t.high);
  mean /= samples;
  Vec3 var = Vec3::Zero();
  for (const auto& t : triples) {
    Vec3 d = Vec3(t.low, t.mid, t.high) - mean;
    var += d.cwiseProduct(d);
  }
  var /= (samples - 1.0);

  ExponentEstimate est;
  est.mean.low = mean[0];
  est.mean.mid = mean[1];
  est.mean.high = mean[2];
  est.mean.orbit_length = n;
  est.samples = samples;
  est.orbit_length = n;
  est.seed = seed;
  for (int c = 0; c < 3; ++c) est.standard_error[static_cast<std::size_t>(c)] = std::sqrt(var[c] / samples);
  return est;
}

InequalityReport exponent_inequality_report(const DAMap& f, const PHCertificate& cert,
                                            const ExponentEstimate& estimate,
                                            double zero_sum_tol) {
  const LinearAnosov& a = f.linear();
  if (cert.splitting != a.splitting) {
    throw SplittingMismatch("exponent_inequality_report: certified splitting case (" +
                            std::string(splitting_name(cert.splitting)) +
                            ") differs from the linearization (" +
                            splitting_name(a.splitting) + ")");
  }
  InequalityReport r;
  r.lambda_ss_linear = a.exponents[0];
  r.lambda_ws_linear = a.exponents[1];
  r.lambda_u_linear = a.exponents[2];

  const auto& se = estimate.standard_error;
  r.unstable_ok = estimate.mean.high <= r.lambda_u_linear + 3.0 * se[2];
  r.strong_stable_ok = estimate.mean.low >= r.lambda_ss_linear - 3.0 * se[0];
  if (a.splitting == SplittingCase::TwoContracting) {
    r.weak_stable_ok = estimate.mean.mid >= r.lambda_ws_linear - 3.0 * se[1];
  }
  r.zero_sum_residual = std::abs(estimate.mean.sum());
  r.zero_sum_tolerance = zero_sum_tol;
  r.zero_sum_ok = r.zero_sum_residual <= zero_sum_tol;
  return r;
}

}  // namespace dav
