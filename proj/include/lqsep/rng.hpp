#ifndef LQSEP_RNG_HPP
#define LQSEP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace lqsep {

// Deterministic, platform-independent random numbers. std::mt19937 would do
// for the bits, but the std distributions are implementation-defined, so the
// whole chain (engine + distributions) is pinned down here: xoshiro256++
// seeded through splitmix64, with explicit uniform / Box-Muller gaussian /
// inverse-CDF Laplace transforms.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  /// Derive an independent stream, e.g. one per test case index.
  static Rng derived(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed;
    std::uint64_t a = splitmix64_next(sm);
    sm = stream ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t b = splitmix64_next(sm);
    return Rng(a ^ (b + 0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t v, int k) {
      return (v << k) | (v >> (64 - k));
    };
    std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Standard normal via Box-Muller; generates pairs and caches the spare.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  /// Laplace(mean, scale) by inverse CDF.
  double laplace(double mean, double scale) {
    double u = next_double() - 0.5;
    double mag = std::log(1.0 - 2.0 * std::fabs(u));
    return u >= 0.0 ? mean - scale * mag : mean + scale * mag;
  }

 private:
  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lqsep

#endif  // LQSEP_RNG_HPP
