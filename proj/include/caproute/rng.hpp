#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace caproute {

/// 64-bit FNV-1a. Stable across platforms; used for feature hashing and
/// for deriving per-entity RNG streams from string keys.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t basis) {
  uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic generator with identical output on every platform.
/// All sampling in the project goes through an explicitly seeded Rng;
/// there is no shared global RNG state.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Child stream seed for a named substream.
  static uint64_t derive(uint64_t seed, std::string_view tag) {
    uint64_t s = seed ^ fnv1a64(tag);
    return splitmix64(s);
  }

  static uint64_t derive(uint64_t seed, uint64_t salt) {
    uint64_t s = seed ^ (salt * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    return splitmix64(s);
  }

 private:
  uint64_t state_;
};

}  // namespace caproute
