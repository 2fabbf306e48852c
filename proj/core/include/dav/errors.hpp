#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dav {

/// Base class for all davlab errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- linear-map analysis ---

/// |det| != 1: the matrix does not induce a volume-preserving torus automorphism.
class NotUnimodular : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue of modulus one: the automorphism is not hyperbolic.
class NotHyperbolic : public Error {
 public:
  using Error::Error;
};

/// Complex pair or repeated root: no splitting into three real line bundles.
class NotSplit : public Error {
 public:
  using Error::Error;
};

// --- map construction / certification ---

class CertificationFailed : public Error {
 public:
  CertificationFailed(const std::string& what, Eigen::Vector3i grid_point)
      : Error(what), grid_point(std::move(grid_point)) {}
  Eigen::Vector3i grid_point;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

// --- periodic orbits ---

class PeriodTooLarge : public Error {
 public:
  using Error::Error;
};

class ComplexEigenvalues : public Error {
 public:
  using Error::Error;
};

class IncompleteData : public Error {
 public:
  using Error::Error;
};

class SplittingMismatch : public Error {
 public:
  using Error::Error;
};

// --- foliation geometry ---

class SignFlip : public Error {
 public:
  using Error::Error;
};

class LeafCollision : public Error {
 public:
  using Error::Error;
};

class LeafEscape : public Error {
 public:
  using Error::Error;
};

class NoCrossing : public Error {
 public:
  using Error::Error;
};

// --- sampling / IO ---

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dav
