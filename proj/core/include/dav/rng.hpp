#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "dav/torus.hpp"

namespace dav {

/// Counter-based deterministic generator (Philox 4x32-10). A draw is a pure
/// function of (seed, stage tag, stream index, position), so parallel
/// workers can consume disjoint streams and results do not depend on the
/// worker count or scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stage_tag, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform in [0,1), 53 random bits.
  double uniform01();

  double uniform(double a, double b);

  /// Uniform point of the unit cube, i.e. Lebesgue on T^3.
  TorusPoint torus_point();

  Vec3 cube_vector();

  /// Isotropic unit vector (Marsaglia rejection).
  Vec3 unit_vector();

 private:
  void refill();
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t pos_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int avail_ = 0;
};

/// 64-bit FNV-1a, used to fold stage tags into RNG keys.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace dav
