#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace fedcyc {

// Counter-based generator: the i-th 64-bit output is the SplitMix64
// finalizer applied to seed + i * 0x9E3779B97F4A7C15 (i starting at 1).
// Gaussian samples use the Box-Muller transform on two consecutive uniforms
// u1, u2 in (0,1]: z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2).
// Both values are used, z0 first. Uniform doubles take the top 53 bits.
//
// Everything that consumes randomness (initialization, shuffling, DP noise,
// synthetic data) goes through this class so results do not depend on the
// standard library's distribution implementations.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a list of tags
// (client id, round, epoch, stream kind, ...). Order of tags matters.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

// Stream kinds used with derive_seed.
enum class Stream : std::uint64_t {
  kGeneratorInit = 1,
  kDiscriminatorInit = 2,
  kEpoch = 3,
  kLatent = 4,
  kSplit = 5,
  kPartition = 6,
  kPairing = 7,
  kSynthetic = 8,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace fedcyc
