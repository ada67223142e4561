#pragma once

#include <cmath>
#include <cstdint>

namespace monosf {

// Counter-free splitmix64 stream. Hand-rolled so that identical seeds give
// bit-identical sequences on every platform, which the deterministic-output
// contract relies on (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Integer in [0, n).
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

  // Derives an independent stream, e.g. per (superpixel id, iteration), so
  // parallel scheduling cannot change the draws any worker sees.
  static Rng derive(uint64_t seed, uint64_t a, uint64_t b = 0) {
    Rng mixer(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL));
    uint64_t s = mixer.next_u64();
    return Rng(s ^ mixer.next_u64());
  }

 private:
  uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace monosf
