#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace crowdcast {

/// Stateless 64-bit finalizer (splitmix64). Used to expand seeds and to
/// derive named substreams, so that stream (seed, a, b, c) is identical no
/// matter which thread draws it or in which order.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_streams(std::uint64_t seed, std::uint64_t a,
                                     std::uint64_t b = 0,
                                     std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ mix64(a + 0x100000001b3ull));
  h = mix64(h ^ mix64(b + 0x61c8864680b583ebull));
  h = mix64(h ^ mix64(c + 0x2545f4914f6cdd1dull));
  return h;
}

/// xoshiro256++ with splitmix64 seeding. Small, fast and reproducible across
/// platforms; all randomized code in this project draws through it instead of
/// <random> distributions, whose output is implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      w = z ^ (z >> 31);
    }
  }

  /// The stream named by (seed, a, b, c); e.g. (master, kMonteCarlo, sim, task).
  static Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0) noexcept {
    return Rng(hash_streams(seed, a, b, c));
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() noexcept { return double(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    return std::uint64_t((__uint128_t(next()) * bound) >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_{};
};

/// Walker alias table for O(1) draws from a fixed discrete distribution.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const noexcept { return accept_.size(); }
  double total_weight() const noexcept { return total_; }

  std::size_t sample(Rng& rng) const noexcept {
    const std::size_t i = std::size_t(rng.below(accept_.size()));
    return rng.uniform() < accept_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> accept_;
  std::vector<std::uint32_t> alias_;
  double total_ = 0.0;
};

}  // namespace crowdcast
