#pragma once

#include <cstdint>
#include <vector>

namespace stylus {

// xoshiro256** seeded through splitmix64. Chosen over std:: distributions so
// that every seeded run is bit-reproducible across platforms and compilers;
// all sampling helpers below are implemented on top of the raw stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound) via rejection sampling.
  uint64_t next_below(uint64_t bound) {
    const uint64_t threshold = -bound % bound;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // 53-bit uniform in [0, 1).
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  double next_real(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
};

// Stable way to fan one user-facing seed out to independent streams
// (per fold, per epoch, per subsystem) without correlated state.
inline uint64_t derive_seed(uint64_t base, uint64_t salt) {
  uint64_t x = base ^ (0x9E3779B97F4A7C15ull * (salt + 1));
  uint64_t a = Rng::splitmix64(x);
  return Rng::splitmix64(x) ^ a;
}

// Fisher-Yates, high index down, so a given seed yields one documented
// permutation forever.
template <typename T>
void fisher_yates(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace stylus
