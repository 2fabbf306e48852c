#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dav/torus.hpp"

namespace dav {

/// Coordinate shear x[target] += amplitude * sin(2 pi frequency . x).
/// frequency is an integer wave vector with frequency[target] = 0, so the
/// Jacobian is I + rank-one with a zero diagonal entry: det = 1 exactly,
/// and the inverse is the same shear with negated amplitude.
struct ShearPerturbation {
  int target = 0;
  Eigen::Vector3i frequency = Eigen::Vector3i::Zero();
  double amplitude = 0.0;
};

/// Rotation by angle theta(q) in a fixed plane of a linear frame, where
/// q = |y|^2 is the squared norm of the frame coordinates of the
/// displacement from the center; identity outside the frame-ball of the
/// given radius. theta depends only on rotation invariants, so the map is
/// exactly volume preserving, and its inverse is the twist with negated
/// angle.
struct TwistPerturbation {
  Mat3 frame = Mat3::Identity();  // unit columns, invertible
  int plane_a = 0;
  int plane_b = 1;
  TorusPoint center;
  double radius = 0.25;
  double max_angle = 0.0;
};

using Perturbation = std::variant<ShearPerturbation, TwistPerturbation>;

/// C^2 bump: 1 at 0, 0 at 1, first and second derivatives vanishing at both
/// ends (quintic smoothstep complement).
double twist_bump(double t);
double twist_bump_deriv(double t);

/// A derived-from-Anosov map f = A . phi_k . ... . phi_1 built from a linear
/// Anosov automorphism and exactly volume-preserving perturbation
/// primitives. Immutable after construction; evaluation, differentiation,
/// inversion and lifting are all closed-form.
class DAMap {
 public:
  DAMap(LinearAnosov linear, std::vector<Perturbation> perturbations = {});

  const LinearAnosov& linear() const { return linear_; }
  const std::vector<Perturbation>& perturbations() const { return perturbations_; }
  bool is_linear() const { return perturbations_.empty(); }

  TorusPoint apply(const TorusPoint& x) const;
  TorusPoint invert(const TorusPoint& y) const;

  /// Lift evaluation: satisfies f~(x + z) = f~(x) + A z for integer z.
  LiftVector apply_lift(const LiftVector& x) const;
  LiftVector invert_lift(const LiftVector& y) const;

  Mat3 derivative(const TorusPoint& x) const;
  /// D(f^{-1}) evaluated at y, i.e. the inverse of Df at f^{-1}(y).
  Mat3 inverse_derivative(const TorusPoint& y) const;

  /// Orbit advance helpers used by the cocycle and certification loops.
  void apply_with_derivative(TorusPoint& x, Mat3& df) const;

  /// sup over the perturbation part of |f~ - A~| estimated on a sample grid;
  /// 0 for the linear map.
  double displacement_sup(int grid = 32) const;

 private:
  LinearAnosov linear_;
  std::vector<Perturbation> perturbations_;
};

}  // namespace dav
