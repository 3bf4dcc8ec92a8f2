#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "agrnn/tensor.hpp"

namespace agrnn {

// xoshiro256** seeded through splitmix64. The stream and the derived
// uniform/index samplers are fully specified here so that a seed
// reproduces bit-identically on any platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Top 53 bits scaled by 2^-53: uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, bound) by rejection.
  std::uint64_t index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::index bound must be > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  // Independent stream for worker / trial `k`.
  Rng split(std::uint64_t k) const {
    std::uint64_t mix = state_[0] ^ (0x9e3779b97f4a7c15ULL * (k + 1));
    return Rng(splitmix64(mix));
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4]{};
};

inline Vector rng_uniform(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rng_uniform: n must be >= 1");
  Vector out(n);
  for (auto& x : out) x = rng.uniform();
  return out;
}

// Fisher-Yates with the repo's own index sampler (std::shuffle is not
// reproducible across standard libraries).
template <class T>
void shuffle(std::vector<T>& xs, Rng& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) {
    std::swap(xs[i - 1], xs[rng.index(i)]);
  }
}

}  // namespace agrnn
