#include "dav/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "dav/intlinalg.hpp"
#include "dav/parallel.hpp"

namespace dav {

namespace {

// A torus point with exactly rational coordinates num[i]/den in [0,1).
struct RationalPoint {
  std::array<std::int64_t, 3> num{0, 0, 0};
  std::int64_t den = 1;

  bool operator<(const RationalPoint& o) const { return num < o.num; }
  bool operator==(const RationalPoint& o) const { return num == o.num; }

  TorusPoint to_torus() const {
    Vec3 v(static_cast<double>(num[0]) / static_cast<double>(den),
           static_cast<double>(num[1]) / static_cast<double>(den),
           static_cast<double>(num[2]) / static_cast<double>(den));
    return wrap(v);
  }
};

std::int64_t mod_positive(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// exact image under an integer matrix, reduced mod 1
RationalPoint apply_int(const IntMatrix3& m, const RationalPoint& p) {
  RationalPoint q;
  q.den = p.den;
  for (int i = 0; i < 3; ++i) {
    __int128 s = 0;
    for (int j = 0; j < 3; ++j) s += static_cast<__int128>(m.a[i][j]) * p.num[j];
    __int128 r = s % p.den;
    if (r < 0) r += p.den;
    q.num[i] = static_cast<std::int64_t>(r);
  }
  return q;
}

// all fixed points of A^n as exact rationals, unsorted
std::vector<RationalPoint> rational_periodic_points(const LinearAnosov& A, int n,
                                                    std::int64_t count_cap) {
  std::int64_t count = linear_periodic_count(A, n);
  if (count > count_cap) {
    throw PeriodTooLarge("period " + std::to_string(n) + " has " + std::to_string(count) +
                         " points, cap is " + std::to_string(count_cap));
  }
  IntMatrix3 m = A.matrix.pow(n) - IntMatrix3::identity();
  IntDiagonalization d = diagonalize_over_z(m);
  // solutions: x = R y with y_i in (1/s_i) Z
  std::int64_t den = std::lcm(std::lcm(std::max<std::int64_t>(d.diag[0], 1),
                                       std::max<std::int64_t>(d.diag[1], 1)),
                              std::max<std::int64_t>(d.diag[2], 1));
  std::vector<RationalPoint> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k0 = 0; k0 < d.diag[0]; ++k0)
    for (std::int64_t k1 = 0; k1 < d.diag[1]; ++k1)
      for (std::int64_t k2 = 0; k2 < d.diag[2]; ++k2) {
        // y_i = k_i / s_i expressed over the common denominator
        std::array<std::int64_t, 3> y = {k0 * (den / d.diag[0]), k1 * (den / d.diag[1]),
                                         k2 * (den / d.diag[2])};
        RationalPoint p;
        p.den = den;
        for (int i = 0; i < 3; ++i) {
          __int128 s = 0;
          for (int j = 0; j < 3; ++j) s += static_cast<__int128>(d.right.a[i][j]) * y[j];
          std::int64_t v = static_cast<std::int64_t>(s % den);
          p.num[i] = mod_positive(v, den);
        }
        pts.push_back(p);
      }
  return pts;
}

// reduce the fraction triple to the smallest common denominator
RationalPoint normalize(const RationalPoint& p) {
  std::int64_t g = p.den;
  for (int i = 0; i < 3; ++i) g = std::gcd(g, p.num[i]);
  if (g <= 1) return p;
  RationalPoint q;
  q.den = p.den / g;
  for (int i = 0; i < 3; ++i) q.num[i] = p.num[i] / g;
  return q;
}

int minimal_period_of(const LinearAnosov& A, const RationalPoint& p, int n) {
  for (int d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    if (apply_int(A.matrix.pow(d), p) == p) return d;
  }
  return n;
}

}  // namespace

std::int64_t linear_periodic_count(const LinearAnosov& A, int n) {
  if (n < 1) throw Error("linear_periodic_count: n must be >= 1");
  IntMatrix3 m = A.matrix.pow(n) - IntMatrix3::identity();
  std::int64_t d = m.det();
  if (d == 0) throw Error("linear_periodic_count: A^n - I singular, map not hyperbolic");
  return std::abs(d);
}

std::vector<TorusPoint> linear_periodic_points(const LinearAnosov& A, int n,
                                               std::int64_t count_cap) {
  auto pts = rational_periodic_points(A, n, count_cap);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (static_cast<std::int64_t>(pts.size()) != linear_periodic_count(A, n)) {
    throw Error("linear_periodic_points: enumeration does not match |det(A^n - I)|");
  }
  std::vector<TorusPoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p.to_torus());
  return out;
}

PeriodicOrbit continue_periodic_orbit(const DAMap& f, const TorusPoint& linear_point, int n,
                                      double tol, int max_iterations) {
  if (n < 1) throw Error("continue_periodic_orbit: n must be >= 1");
  const IntMatrix3 an = f.linear().matrix.pow(n);

  // translation vector of the linear orbit: m = (A^n - I) p, exact up to rounding
  Vec3 p0 = linear_point.lift();
  Vec3 mreal = an.apply(p0) - p0;
  Eigen::Vector3i m(static_cast<int>(std::lround(mreal[0])), static_cast<int>(std::lround(mreal[1])),
                    static_cast<int>(std::lround(mreal[2])));
  if ((mreal - m.cast<double>()).norm() > 1e-6) {
    throw Error("continue_periodic_orbit: input is not A-periodic of period " + std::to_string(n));
  }

  auto orbit_map = [&](const Vec3& x, Mat3* jac) {
    Vec3 y = x;
    Mat3 j = Mat3::Identity();
    for (int i = 0; i < n; ++i) {
      if (jac) j = f.derivative(wrap(y)) * j;
      y = f.apply_lift(y);
    }
    if (jac) *jac = j;
    return y;
  };

  Vec3 x = p0;
  Vec3 target_shift = m.cast<double>();
  double resid = (orbit_map(x, nullptr) - x - target_shift).norm();
  for (int it = 0; it < max_iterations; ++it) {
    if (resid <= tol) break;
    Mat3 jac;
    Vec3 fx = orbit_map(x, &jac);
    Vec3 F = fx - x - target_shift;
    Mat3 J = jac - Mat3::Identity();
    Vec3 delta = J.partialPivLu().solve(-F);
    if (!delta.allFinite()) {
      throw NoConvergence("continue_periodic_orbit: singular Newton system at period " +
                          std::to_string(n));
    }
    // halve the step while the residual grows
    double step = 1.0;
    Vec3 xn = x + delta;
    double rn = (orbit_map(xn, nullptr) - xn - target_shift).norm();
    int halvings = 0;
    while (rn > resid && halvings < 8) {
      step *= 0.5;
      xn = x + step * delta;
      rn = (orbit_map(xn, nullptr) - xn - target_shift).norm();
      ++halvings;
    }
    x = xn;
    resid = rn;
  }
  if (!(resid <= tol)) {
    throw NoConvergence("continue_periodic_orbit: residual " + std::to_string(resid) +
                        " after " + std::to_string(max_iterations) + " iterations");
  }

  PeriodicOrbit orbit;
  orbit.period = n;
  orbit.representative = wrap(x);
  orbit.translation = m;
  orbit.residual = torus_distance(wrap(orbit_map(x, nullptr)), wrap(x));

  // minimal period of the continued orbit
  orbit.minimal_period = n;
  TorusPoint y = orbit.representative;
  for (int d = 1; d < n; ++d) {
    y = f.apply(y);
    if (n % d == 0 && torus_distance(y, orbit.representative) <= 10 * tol) {
      orbit.minimal_period = d;
      break;
    }
  }
  return orbit;
}

PeriodicData periodic_data(const DAMap& f, const PeriodicOrbit& orbit) {
  if (orbit.residual > 1e-10) {
    throw Error("periodic_data: orbit residual above 1e-10");
  }
  const int n = orbit.period;
  TorusPoint x = orbit.representative;
  Mat3 prod = Mat3::Identity();
  double log_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    Mat3 df;
    f.apply_with_derivative(x, df);
    prod = df * prod;
    double s = prod.cwiseAbs().maxCoeff();
    if (s > 0) {
      prod /= s;
      log_scale += std::log(s);
    }
  }
  Eigen::EigenSolver<Mat3> es(prod);
  std::array<double, 3> logs;
  for (int i = 0; i < 3; ++i) {
    std::complex<double> ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) > 1e-8 * std::max(1.0, std::abs(ev))) {
      throw ComplexEigenvalues("periodic_data: complex return-map spectrum at period " +
                               std::to_string(n));
    }
    logs[static_cast<std::size_t>(i)] = std::log(std::abs(ev)) + log_scale;
  }
  std::sort(logs.begin(), logs.end());
  PeriodicData data;
  data.orbit = orbit;
  for (int i = 0; i < 3; ++i) data.exponents[static_cast<std::size_t>(i)] = logs[static_cast<std::size_t>(i)] / n;
  return data;
}

ConstancyReport periodic_data_constancy(const DAMap& f, int max_period, double tol,
                                        std::int64_t count_cap, int workers) {
  const LinearAnosov& A = f.linear();

  // enumerate orbits of A by canonical representative, one per cyclic class
  struct Seed {
    RationalPoint rep;
    int period;
  };
  std::vector<Seed> seeds;
  std::set<std::array<std::int64_t, 4>> seen;  // normalized fractions across periods
  for (int n = 1; n <= max_period; ++n) {
    auto pts = rational_periodic_points(A, n, count_cap);
    for (const auto& p : pts) {
      if (minimal_period_of(A, p, n) != n) continue;
      // canonical representative of the cyclic orbit
      RationalPoint best = p;
      RationalPoint cur = p;
      for (int j = 1; j < n; ++j) {
        cur = apply_int(A.matrix, cur);
        if (cur < best) best = cur;
      }
      RationalPoint norm = normalize(best);
      if (!seen.insert({norm.num[0], norm.num[1], norm.num[2], norm.den}).second) continue;
      seeds.push_back({best, n});
    }
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) {
    if (a.period != b.period) return a.period < b.period;
    return a.rep < b.rep;
  });

  std::vector<PeriodicData> data(seeds.size());
  std::vector<std::string> failures(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    try {
      PeriodicOrbit orbit = continue_periodic_orbit(f, seeds[i].rep.to_torus(), seeds[i].period);
      data[i] = periodic_data(f, orbit);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!failures[i].empty()) {
      throw IncompleteData("periodic_data_constancy: orbit of period " +
                           std::to_string(seeds[i].period) + " lost: " + failures[i]);
    }
  }

  ConstancyReport report;
  report.max_period = max_period;
  report.tolerance = tol;
  report.splitting = A.splitting;
  report.orbits = std::move(data);

  for (int c = 0; c < 3; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& d : report.orbits) {
      lo = std::min(lo, d.exponents[static_cast<std::size_t>(c)]);
      hi = std::max(hi, d.exponents[static_cast<std::size_t>(c)]);
    }
    report.spreads[static_cast<std::size_t>(c)] = hi - lo;
    report.constant[static_cast<std::size_t>(c)] = report.spreads[static_cast<std::size_t>(c)] <= tol;
  }

  // Gogolev's criterion concerns the strong direction on the center's side:
  // strong stable when the center contracts, strong unstable when it expands.
  int relevant = A.splitting == SplittingCase::TwoContracting ? 0 : 2;
  report.predicted_absolute_continuity = report.constant[static_cast<std::size_t>(relevant)];
  report.predicted_c1_rigidity =
      report.constant[0] && report.constant[1] && report.constant[2];
  return report;
}

}  // namespace dav
