#pragma once

#include <cstdint>
#include <random>

namespace pasa {

// Mixing function used for seed derivation (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/**
 * Seedable random generator with draws that are bit-identical across
 * platforms.  The engine is std::mt19937_64 (output fully specified by the
 * standard); the integer and floating point draws below are implemented
 * here rather than with std::*_distribution, whose output is
 * implementation-defined.
 *
 * Streams: derive(id) produces an independent child generator whose seed
 * depends only on this generator's seed and the id, not on how many values
 * have been drawn.  Environment sampling, policy sampling and agent
 * exploration each use their own derived stream.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, n) by rejection on the top 64-bit range.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n) - 1;
    std::uint64_t x = next_u64();
    while (x > limit) x = next_u64();
    return x % n;
  }

  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  Rng derive(std::uint64_t stream) const { return Rng(mix64(seed_ ^ mix64(stream + 1))); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace pasa
