#include "dav/damap.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace dav {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double twist_bump(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double twist_bump_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -t * t * (30.0 + t * (-60.0 + 30.0 * t));
}

namespace {

// --- shear primitive ---

Vec3 shear_forward(const ShearPerturbation& s, const Vec3& x) {
  double phase = kTwoPi * (s.frequency[0] * x[0] + s.frequency[1] * x[1] + s.frequency[2] * x[2]);
  Vec3 y = x;
  y[s.target] += s.amplitude * std::sin(phase);
  return y;
}

Vec3 shear_inverse(const ShearPerturbation& s, const Vec3& y) {
  // frequency[target] = 0: the phase does not involve the sheared coordinate
  double phase = kTwoPi * (s.frequency[0] * y[0] + s.frequency[1] * y[1] + s.frequency[2] * y[2]);
  Vec3 x = y;
  x[s.target] -= s.amplitude * std::sin(phase);
  return x;
}

Mat3 shear_jacobian(const ShearPerturbation& s, const Vec3& x) {
  double phase = kTwoPi * (s.frequency[0] * x[0] + s.frequency[1] * x[1] + s.frequency[2] * x[2]);
  double g = s.amplitude * kTwoPi * std::cos(phase);
  Mat3 j = Mat3::Identity();
  for (int c = 0; c < 3; ++c) j(s.target, c) += g * s.frequency[c];
  return j;
}

// --- twist primitive ---

struct TwistContext {
  Mat3 frame_inv;
  int axis;  // the frame index fixed by the rotation
};

TwistContext twist_context(const TwistPerturbation& t) {
  TwistContext ctx;
  ctx.frame_inv = t.frame.inverse();
  ctx.axis = 3 - t.plane_a - t.plane_b;
  return ctx;
}

Vec3 twist_forward(const TwistPerturbation& t, const TwistContext& ctx, const Vec3& x,
                   double sign) {
  // displacement from the center via the nearest deck translate
  Vec3 d = wrap(x).coords() - t.center.coords();
  for (int i = 0; i < 3; ++i) d[i] -= std::floor(d[i] + 0.5);
  Vec3 y = ctx.frame_inv * d;
  double q = y.squaredNorm();
  double r2 = t.radius * t.radius;
  if (q >= r2) return x;
  double theta = sign * t.max_angle * twist_bump(q / r2);
  double c = std::cos(theta), s = std::sin(theta);
  Vec3 z = y;
  z[t.plane_a] = c * y[t.plane_a] - s * y[t.plane_b];
  z[t.plane_b] = s * y[t.plane_a] + c * y[t.plane_b];
  return x + t.frame * (z - y);
}

Mat3 twist_jacobian(const TwistPerturbation& t, const TwistContext& ctx, const Vec3& x) {
  Vec3 d = wrap(x).coords() - t.center.coords();
  for (int i = 0; i < 3; ++i) d[i] -= std::floor(d[i] + 0.5);
  Vec3 y = ctx.frame_inv * d;
  double q = y.squaredNorm();
  double r2 = t.radius * t.radius;
  if (q >= r2) return Mat3::Identity();
  double theta = t.max_angle * twist_bump(q / r2);
  double dtheta = t.max_angle * twist_bump_deriv(q / r2) / r2;  // d theta / d q
  double c = std::cos(theta), s = std::sin(theta);

  const int a = t.plane_a, b = t.plane_b;
  Mat3 dz = Mat3::Identity();
  dz(a, a) = c;
  dz(a, b) = -s;
  dz(b, a) = s;
  dz(b, b) = c;
  // rotation angle varies with q: dz/dy += (dR/dtheta * y_plane) (dtheta/dq) (dq/dy)
  Vec3 dRy = Vec3::Zero();
  dRy[a] = -s * y[a] - c * y[b];
  dRy[b] = c * y[a] - s * y[b];
  dz += (dRy * dtheta) * (2.0 * y).transpose();
  return t.frame * dz * ctx.frame_inv;
}

void validate(const LinearAnosov& linear, const Perturbation& p) {
  if (const auto* s = std::get_if<ShearPerturbation>(&p)) {
    if (s->target < 0 || s->target > 2) throw Error("shear: target index out of range");
    if (s->frequency[s->target] != 0)
      throw Error("shear: frequency component at the target coordinate must be 0");
    if (s->frequency == Eigen::Vector3i::Zero()) throw Error("shear: zero frequency vector");
    if (!std::isfinite(s->amplitude)) throw Error("shear: non-finite amplitude");
  } else {
    const auto& t = std::get<TwistPerturbation>(p);
    if (t.plane_a < 0 || t.plane_a > 2 || t.plane_b < 0 || t.plane_b > 2 ||
        t.plane_a == t.plane_b)
      throw Error("twist: invalid rotation plane indices");
    for (int c = 0; c < 3; ++c) {
      if (std::abs(t.frame.col(c).norm() - 1.0) > 1e-9)
        throw Error("twist: frame columns must be unit vectors");
    }
    Eigen::JacobiSVD<Mat3> svd(t.frame);
    double smin = svd.singularValues()(2);
    double smax = svd.singularValues()(0);
    if (smin < 1e-6) throw Error("twist: degenerate frame");
    if (!(t.radius > 0.0)) throw Error("twist: radius must be positive");
    // the support (a frame-ball) must embed in the torus without wrapping
    if (t.radius * smax >= 0.5)
      throw Error("twist: support of radius " + std::to_string(t.radius * smax) +
                  " does not embed in the torus");
    if (!std::isfinite(t.max_angle)) throw Error("twist: non-finite angle");
  }
  (void)linear;
}

}  // namespace

DAMap::DAMap(LinearAnosov linear, std::vector<Perturbation> perturbations)
    : linear_(std::move(linear)), perturbations_(std::move(perturbations)) {
  for (const auto& p : perturbations_) validate(linear_, p);
}

LiftVector DAMap::apply_lift(const LiftVector& x) const {
  Vec3 y = x;
  for (const auto& p : perturbations_) {
    if (const auto* s = std::get_if<ShearPerturbation>(&p)) {
      y = shear_forward(*s, y);
    } else {
      const auto& t = std::get<TwistPerturbation>(p);
      y = twist_forward(t, twist_context(t), y, +1.0);
    }
  }
  return linear_.matrix.apply(y);
}

LiftVector DAMap::invert_lift(const LiftVector& y) const {
  Vec3 x = linear_.matrix.unimodular_inverse().apply(y);
  for (auto it = perturbations_.rbegin(); it != perturbations_.rend(); ++it) {
    if (const auto* s = std::get_if<ShearPerturbation>(&*it)) {
      x = shear_inverse(*s, x);
    } else {
      const auto& t = std::get<TwistPerturbation>(*it);
      // the twist preserves q, so the inverse is the twist by -theta
      x = twist_forward(t, twist_context(t), x, -1.0);
    }
  }
  return x;
}

TorusPoint DAMap::apply(const TorusPoint& x) const {
  return wrap(apply_lift(x.lift()));
}

TorusPoint DAMap::invert(const TorusPoint& y) const {
  return wrap(invert_lift(y.lift()));
}

Mat3 DAMap::derivative(const TorusPoint& x) const {
  Mat3 j = Mat3::Identity();
  Vec3 y = x.lift();
  for (const auto& p : perturbations_) {
    if (const auto* s = std::get_if<ShearPerturbation>(&p)) {
      j = shear_jacobian(*s, y) * j;
      y = shear_forward(*s, y);
    } else {
      const auto& t = std::get<TwistPerturbation>(p);
      auto ctx = twist_context(t);
      j = twist_jacobian(t, ctx, y) * j;
      y = twist_forward(t, ctx, y, +1.0);
    }
  }
  return linear_.matrix.to_real() * j;
}

Mat3 DAMap::inverse_derivative(const TorusPoint& y) const {
  TorusPoint x = invert(y);
  return derivative(x).inverse();
}

void DAMap::apply_with_derivative(TorusPoint& x, Mat3& df) const {
  df = derivative(x);
  x = apply(x);
}

double DAMap::displacement_sup(int grid) const {
  if (is_linear()) return 0.0;
  Mat3 a = linear_.matrix.to_real();
  double sup = 0.0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      for (int k = 0; k < grid; ++k) {
        Vec3 x(static_cast<double>(i) / grid, static_cast<double>(j) / grid,
               static_cast<double>(k) / grid);
        double d = (apply_lift(x) - a * x).norm();
        if (d > sup) sup = d;
      }
  return sup;
}

}  // namespace dav
