#pragma once

#include <cmath>
#include <cstdint>

namespace rdnet {

// splitmix64 mixing function. All seeding and sampling in the project goes
// through this generator instead of <random> distributions so that results
// are identical across standard library implementations.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives a child seed from a master seed and two stream indices.
// splitmix64 is a bijection, so distinct (a, b) give distinct seeds for a
// fixed master.
inline uint64_t derive_seed(uint64_t master, uint32_t a, uint32_t b) {
  return splitmix64(master ^ splitmix64((uint64_t(a) << 32) | uint64_t(b)));
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound). Lemire's multiply-shift with rejection.
  uint32_t below(uint32_t bound) {
    uint64_t x = next() & 0xffffffffull;
    uint64_t m = x * bound;
    auto lo = uint32_t(m);
    if (lo < bound) {
      uint32_t t = uint32_t(-int64_t(bound)) % bound;
      while (lo < t) {
        x = next() & 0xffffffffull;
        m = x * bound;
        lo = uint32_t(m);
      }
    }
    return uint32_t(m >> 32);
  }

  // Double in [0, 1) with 53 random bits.
  double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rdnet
