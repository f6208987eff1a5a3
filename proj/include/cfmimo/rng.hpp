#ifndef CFMIMO_RNG_HPP
#define CFMIMO_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace cfmimo {

// splitmix64 step; used for seeding and for deriving child stream seeds.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic seed for an independent child stream. Used to split one base
// seed into per-realization / per-draw / per-purpose streams so that, e.g.,
// disabling noise does not shift the channel draws.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t s = seed ^ (0x632BE59BD9B4E019ULL + 0x9E3779B97F4A7C15ULL * (stream + 1));
  uint64_t z = splitmix64(s);
  return splitmix64(s) ^ z;
}

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that results are
// bit-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; second value cached.
  double gaussian() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

  // Circularly-symmetric complex Gaussian CN(0, variance):
  // real and imaginary parts i.i.d. N(0, variance/2).
  std::complex<double> complex_gaussian(double variance) {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4] = {1, 2, 3, 4};
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace cfmimo

#endif
