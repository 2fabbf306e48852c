#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "dav/errors.hpp"

namespace dav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A displacement in the universal cover R^3.
using LiftVector = Vec3;

/// A point on T^3 = R^3/Z^3, stored with every coordinate in [0,1).
class TorusPoint {
 public:
  TorusPoint() : c_(Vec3::Zero()) {}

  /// Construct from coordinates already known to lie in [0,1).
  /// Use wrap() for general lift vectors.
  static TorusPoint from_unit_coords(const Vec3& c);

  const Vec3& coords() const { return c_; }
  double operator[](int i) const { return c_[i]; }

  /// Canonical lift: the representative with coordinates in [0,1)^3.
  LiftVector lift() const { return c_; }

 private:
  explicit TorusPoint(Vec3 c) : c_(std::move(c)) {}
  friend TorusPoint wrap(const LiftVector&);
  Vec3 c_;
};

/// Reduce a lift vector mod 1 into [0,1)^3. Values within 1e-15 of an
/// integer snap to 0 so that e.g. wrap(-1e-16) = 0 rather than 1-1e-16.
/// Rejects non-finite input.
TorusPoint wrap(const LiftVector& v);

/// The representative of q - p with every component in [-0.5, 0.5).
/// Its Euclidean norm realizes the flat torus distance.
LiftVector min_displacement(const TorusPoint& p, const TorusPoint& q);

double torus_distance(const TorusPoint& p, const TorusPoint& q);

/// 3x3 integer matrix with exact arithmetic (overflow-checked).
struct IntMatrix3 {
  std::array<std::array<std::int64_t, 3>, 3> a{};

  static IntMatrix3 identity();
  static IntMatrix3 from_rows(const std::array<std::int64_t, 9>& row_major);

  std::int64_t& operator()(int i, int j) { return a[i][j]; }
  std::int64_t operator()(int i, int j) const { return a[i][j]; }

  std::int64_t det() const;
  IntMatrix3 operator*(const IntMatrix3& o) const;
  IntMatrix3 operator-(const IntMatrix3& o) const;
  IntMatrix3 pow(int n) const;  // n >= 0

  /// Adjugate divided by det, valid only when |det| = 1.
  IntMatrix3 unimodular_inverse() const;

  /// Characteristic polynomial x^3 + c[2] x^2 + c[1] x + c[0], exact.
  std::array<std::int64_t, 3> char_poly() const;

  Vec3 apply(const Vec3& v) const;
  Mat3 to_real() const;

  bool operator==(const IntMatrix3& o) const { return a == o.a; }
};

/// Which of the two partially hyperbolic Anosov splittings holds.
enum class SplittingCase {
  TwoContracting,  // E^ss + E^ws + E^u   (center = weak stable)
  TwoExpanding,    // E^s  + E^wu + E^uu  (center = weak unstable)
};

const char* splitting_name(SplittingCase c);

/// Bundle labels for the case at hand ({"ss","ws","u"} or {"s","wu","uu"}),
/// indexed by increasing eigenvalue modulus.
std::array<const char*, 3> bundle_names(SplittingCase c);

/// Eigendata of a hyperbolic unimodular integer matrix with three real
/// eigenvalues of distinct moduli, none on the unit circle.
struct LinearAnosov {
  IntMatrix3 matrix;
  std::array<double, 3> eigenvalues;   // sorted by increasing |mu|, signed
  std::array<Vec3, 3> eigenvectors;    // unit norm, first nonzero component > 0
  std::array<double, 3> exponents;     // log|mu_i|, sum 0
  SplittingCase splitting;

  /// Columns are the eigenvectors, same order as eigenvalues.
  const Mat3& eigenbasis() const { return basis_; }
  const Mat3& eigenbasis_inverse() const { return basis_inv_; }

  /// The intermediate (center) direction is always index 1.
  double center_eigenvalue() const { return eigenvalues[1]; }
  double center_exponent() const { return exponents[1]; }

  Mat3 basis_;      // filled by analyze_linear
  Mat3 basis_inv_;
};

/// Validate and analyze an integer matrix as a linear Anosov automorphism:
/// exact |det| = 1 and characteristic polynomial, discriminant test for
/// three distinct real roots, exact rejection of eigenvalue +-1, root
/// isolation by sign-change bisection to 1e-14 followed by Newton polish.
///
/// Throws NotUnimodular, NotHyperbolic, or NotSplit.
LinearAnosov analyze_linear(const IntMatrix3& M);

}  // namespace dav
