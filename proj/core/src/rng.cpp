#include "dav/rng.hpp"

namespace dav {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
  std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
  std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
  std::array<std::uint32_t, 4> out;
  out[0] = static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0];
  out[1] = static_cast<std::uint32_t>(p1);
  out[2] = static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1];
  out[3] = static_cast<std::uint32_t>(p0);
  c = out;
}

std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                      std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    philox_round(ctr, key);
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::string_view stage_tag, std::uint64_t stream)
    : stream_(stream) {
  std::uint64_t k = splitmix64(seed ^ fnv1a64(stage_tag));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void CounterRng::refill() {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(pos_), static_cast<std::uint32_t>(pos_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  buf_ = philox10(ctr, key_);
  ++pos_;
  avail_ = 4;
}

std::uint64_t CounterRng::next_u64() {
  if (avail_ < 2) refill();
  std::uint64_t hi = buf_[static_cast<std::size_t>(--avail_)];
  std::uint64_t lo = buf_[static_cast<std::size_t>(--avail_)];
  return (hi << 32) | lo;
}

double CounterRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double a, double b) {
  return a + (b - a) * uniform01();
}

TorusPoint CounterRng::torus_point() {
  return wrap(cube_vector());
}

Vec3 CounterRng::cube_vector() {
  Vec3 v;
  v[0] = uniform01();
  v[1] = uniform01();
  v[2] = uniform01();
  return v;
}

Vec3 CounterRng::unit_vector() {
  for (;;) {
    Vec3 v(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    double n2 = v.squaredNorm();
    if (n2 > 1e-8 && n2 <= 1.0) return v / std::sqrt(n2);
  }
}

}  // namespace dav
