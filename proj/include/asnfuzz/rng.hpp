#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "asnfuzz/bigint.hpp"

namespace asnfuzz {

// Seeded PRNG whose output is identical on every platform. The standard
// distributions are implementation-defined, so bounded draws are done here
// by rejection sampling over the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    if ((n & (n - 1)) == 0) return next() & (n - 1);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [lo, hi].
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
    if (hi - lo == UINT64_MAX) return next();
    return lo + below(hi - lo + 1);
  }

  bool coin() { return (next() >> 63) != 0; }

  // True with probability p.
  bool chance(double p) {
    return static_cast<double>(next() >> 11) * 0x1.0p-53 < p;
  }

  std::uint8_t byte() { return static_cast<std::uint8_t>(next() >> 56); }

  // Uniform in [lo, hi] for arbitrary-precision bounds.
  BigInt range(const BigInt& lo, const BigInt& hi);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  template <class T>
  const T& pick(std::span<const T> v) {
    return v[below(v.size())];
  }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace asnfuzz
