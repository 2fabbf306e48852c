#include "dav/torus.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dav {

namespace {
constexpr double kWrapSnap = 1e-15;
}

TorusPoint TorusPoint::from_unit_coords(const Vec3& c) {
  for (int i = 0; i < 3; ++i) {
    if (!(c[i] >= 0.0 && c[i] < 1.0)) {
      throw Error("TorusPoint coordinate out of [0,1)");
    }
  }
  return wrap(c);
}

TorusPoint wrap(const LiftVector& v) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(v[i])) throw Error("wrap: non-finite component");
    double y = v[i] - std::floor(v[i]);
    if (y >= 1.0 || 1.0 - y < kWrapSnap) y = 0.0;
    out[i] = y;
  }
  return TorusPoint(out);
}

LiftVector min_displacement(const TorusPoint& p, const TorusPoint& q) {
  Vec3 d = q.coords() - p.coords();
  for (int i = 0; i < 3; ++i) {
    // reduce into [-0.5, 0.5)
    d[i] -= std::floor(d[i] + 0.5);
  }
  return d;
}

double torus_distance(const TorusPoint& p, const TorusPoint& q) {
  return min_displacement(p, q).norm();
}

// --- IntMatrix3 -------------------------------------------------------------

namespace {

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw Error("integer overflow in matrix arithmetic");
  return r;
}

std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw Error("integer overflow in matrix arithmetic");
  return r;
}

std::int64_t checked_sub(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_sub_overflow(x, y, &r)) throw Error("integer overflow in matrix arithmetic");
  return r;
}

}  // namespace

IntMatrix3 IntMatrix3::identity() {
  IntMatrix3 m;
  for (int i = 0; i < 3; ++i) m.a[i][i] = 1;
  return m;
}

IntMatrix3 IntMatrix3::from_rows(const std::array<std::int64_t, 9>& r) {
  IntMatrix3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.a[i][j] = r[static_cast<std::size_t>(3 * i + j)];
  return m;
}

std::int64_t IntMatrix3::det() const {
  const auto& m = a;
  std::int64_t t0 = checked_sub(checked_mul(m[1][1], m[2][2]), checked_mul(m[1][2], m[2][1]));
  std::int64_t t1 = checked_sub(checked_mul(m[1][0], m[2][2]), checked_mul(m[1][2], m[2][0]));
  std::int64_t t2 = checked_sub(checked_mul(m[1][0], m[2][1]), checked_mul(m[1][1], m[2][0]));
  return checked_add(checked_sub(checked_mul(m[0][0], t0), checked_mul(m[0][1], t1)),
                     checked_mul(m[0][2], t2));
}

IntMatrix3 IntMatrix3::operator*(const IntMatrix3& o) const {
  IntMatrix3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < 3; ++k) s = checked_add(s, checked_mul(a[i][k], o.a[k][j]));
      r.a[i][j] = s;
    }
  return r;
}

IntMatrix3 IntMatrix3::operator-(const IntMatrix3& o) const {
  IntMatrix3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.a[i][j] = checked_sub(a[i][j], o.a[i][j]);
  return r;
}

IntMatrix3 IntMatrix3::pow(int n) const {
  if (n < 0) throw Error("IntMatrix3::pow: negative exponent");
  IntMatrix3 r = identity();
  for (int i = 0; i < n; ++i) r = r * (*this);
  return r;
}

IntMatrix3 IntMatrix3::unimodular_inverse() const {
  std::int64_t d = det();
  if (d != 1 && d != -1) throw NotUnimodular("unimodular_inverse: |det| != 1");
  IntMatrix3 adj;
  const auto& m = a;
  adj.a[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  adj.a[0][1] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
  adj.a[0][2] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  adj.a[1][0] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  adj.a[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
  adj.a[1][2] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
  adj.a[2][0] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  adj.a[2][1] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
  adj.a[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (d == -1) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) adj.a[i][j] = -adj.a[i][j];
  }
  return adj;
}

std::array<std::int64_t, 3> IntMatrix3::char_poly() const {
  const auto& m = a;
  std::int64_t tr = checked_add(checked_add(m[0][0], m[1][1]), m[2][2]);
  // sum of principal 2x2 minors
  std::int64_t s = 0;
  s = checked_add(s, checked_sub(checked_mul(m[1][1], m[2][2]), checked_mul(m[1][2], m[2][1])));
  s = checked_add(s, checked_sub(checked_mul(m[0][0], m[2][2]), checked_mul(m[0][2], m[2][0])));
  s = checked_add(s, checked_sub(checked_mul(m[0][0], m[1][1]), checked_mul(m[0][1], m[1][0])));
  // p(x) = x^3 - tr x^2 + s x - det
  return {-det(), s, -tr};
}

Vec3 IntMatrix3::apply(const Vec3& v) const {
  Vec3 r;
  for (int i = 0; i < 3; ++i)
    r[i] = static_cast<double>(a[i][0]) * v[0] + static_cast<double>(a[i][1]) * v[1] +
           static_cast<double>(a[i][2]) * v[2];
  return r;
}

Mat3 IntMatrix3::to_real() const {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = static_cast<double>(a[i][j]);
  return m;
}

// --- analyze_linear ---------------------------------------------------------

const char* splitting_name(SplittingCase c) {
  return c == SplittingCase::TwoContracting ? "two_contracting" : "two_expanding";
}

std::array<const char*, 3> bundle_names(SplittingCase c) {
  if (c == SplittingCase::TwoContracting) return {"ss", "ws", "u"};
  return {"s", "wu", "uu"};
}

namespace {

double poly_eval(const std::array<std::int64_t, 3>& c, double x) {
  return ((x + static_cast<double>(c[2])) * x + static_cast<double>(c[1])) * x +
         static_cast<double>(c[0]);
}

double poly_deriv(const std::array<std::int64_t, 3>& c, double x) {
  return (3.0 * x + 2.0 * static_cast<double>(c[2])) * x + static_cast<double>(c[1]);
}

// One root of p in [lo, hi] with p(lo), p(hi) of opposite (weak) sign.
double bisect_root(const std::array<std::int64_t, 3>& c, double lo, double hi) {
  double flo = poly_eval(c, lo);
  double fhi = poly_eval(c, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NotSplit("root isolation: no sign change in bracket");
  while (hi - lo > 1e-14 * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    double mid = 0.5 * (lo + hi);
    double fm = poly_eval(c, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  // Newton polish to full double precision
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    double d = poly_deriv(c, x);
    if (d == 0.0) break;
    x -= poly_eval(c, x) / d;
  }
  return x;
}

}  // namespace

LinearAnosov analyze_linear(const IntMatrix3& M) {
  std::int64_t d = M.det();
  if (d != 1 && d != -1) {
    throw NotUnimodular("analyze_linear: |det| = " + std::to_string(std::abs(d)) +
                        ", volume preservation requires |det| = 1");
  }
  auto c = M.char_poly();  // x^3 + c2 x^2 + c1 x + c0, exact integers
  const std::int64_t c0 = c[0], c1 = c[1], c2 = c[2];

  // Real eigenvalues of modulus one are exactly +-1; test in integers.
  std::int64_t p1 = 1 + c2 + c1 + c0;
  std::int64_t pm1 = -1 + c2 - c1 + c0;
  if (p1 == 0 || pm1 == 0) {
    throw NotHyperbolic("analyze_linear: eigenvalue of modulus one (root at +-1)");
  }

  // Discriminant of x^3 + p x^2 + q x + r, exact: positive iff three
  // distinct real roots.
  {
    const std::int64_t p = c2, q = c1, r = c0;
    std::int64_t disc = 18 * p * q * r - 4 * p * p * p * r + p * p * q * q - 4 * q * q * q -
                        27 * r * r;
    if (disc < 0) throw NotSplit("analyze_linear: complex eigenvalue pair (discriminant < 0)");
    if (disc == 0) throw NotSplit("analyze_linear: repeated eigenvalue (discriminant = 0)");
  }

  // Three real distinct roots: isolate them with the critical points of p.
  double B = 1.0 + std::max({std::abs(static_cast<double>(c0)), std::abs(static_cast<double>(c1)),
                             std::abs(static_cast<double>(c2))});
  // p'(x) = 3x^2 + 2 c2 x + c1
  double qd = static_cast<double>(c2) * static_cast<double>(c2) - 3.0 * static_cast<double>(c1);
  if (qd <= 0) throw NotSplit("analyze_linear: derivative has no real critical points");
  double sq = std::sqrt(qd);
  double crit1 = (-static_cast<double>(c2) - sq) / 3.0;
  double crit2 = (-static_cast<double>(c2) + sq) / 3.0;

  std::array<double, 3> roots = {bisect_root(c, -B, crit1), bisect_root(c, crit1, crit2),
                                 bisect_root(c, crit2, B)};
  std::sort(roots.begin(), roots.end(),
            [](double x, double y) { return std::abs(x) < std::abs(y); });

  LinearAnosov out;
  out.matrix = M;
  out.eigenvalues = roots;

  int contracting = 0;
  for (int i = 0; i < 3; ++i) {
    out.exponents[i] = std::log(std::abs(roots[i]));
    if (std::abs(roots[i]) < 1.0) ++contracting;
  }
  // |det| = 1 with no modulus-one eigenvalue forces 1 or 2 contracting.
  out.splitting =
      contracting == 2 ? SplittingCase::TwoContracting : SplittingCase::TwoExpanding;

  Mat3 Mr = M.to_real();
  for (int i = 0; i < 3; ++i) {
    Mat3 K = Mr - roots[i] * Mat3::Identity();
    // Null vector from the largest cross product of two rows.
    Vec3 best = Vec3::Zero();
    double best_norm = -1.0;
    for (int r1 = 0; r1 < 3; ++r1)
      for (int r2 = r1 + 1; r2 < 3; ++r2) {
        Vec3 cr = K.row(r1).transpose().cross(K.row(r2).transpose());
        if (cr.norm() > best_norm) {
          best_norm = cr.norm();
          best = cr;
        }
      }
    if (best_norm <= 0) throw NotSplit("analyze_linear: degenerate eigenvector");
    best.normalize();
    for (int k = 0; k < 3; ++k) {
      if (std::abs(best[k]) > 1e-12) {
        if (best[k] < 0) best = -best;
        break;
      }
    }
    double resid = (Mr * best - roots[i] * best).norm();
    if (resid > 1e-12) {
      throw NotSplit("analyze_linear: eigenvector residual " + std::to_string(resid));
    }
    out.eigenvectors[i] = best;
  }

  double esum = out.exponents[0] + out.exponents[1] + out.exponents[2];
  if (std::abs(esum) > 1e-12) {
    throw Error("analyze_linear: exponent sum violates |det| = 1");
  }

  for (int i = 0; i < 3; ++i) out.basis_.col(i) = out.eigenvectors[i];
  out.basis_inv_ = out.basis_.inverse();
  return out;
}

}  // namespace dav
