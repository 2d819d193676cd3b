#pragma once

// Counter-based 64-bit generator.
//
// Every draw is a pure function of (key, counter): output = mix64(key + counter * kGolden)
// with the SplitMix64 finalizer. Keys are derived hierarchically
// (seed -> episode -> step -> purpose) with derive_key(), so any stream can be
// reproduced in isolation by another implementation that adopts the same mixing.

#include <cstdint>
#include <limits>

namespace calf {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child key for `stream` under `parent`.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t stream) noexcept {
  return mix64(parent ^ mix64(stream + kGolden));
}

/// Named sub-streams used by the agents. Values are part of the stream contract.
enum class Stream : std::uint64_t {
  relax = 1,
  explore = 2,
  actor = 3,
  policy = 4,
  init = 5,
  episode = 6,
};

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept { return mix64(key_ + (counter_++) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  constexpr CounterRng split(std::uint64_t stream) const noexcept {
    return CounterRng(derive_key(key_, stream));
  }
  constexpr CounterRng split(Stream s) const noexcept {
    return split(static_cast<std::uint64_t>(s));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Root generator for (seed, episode).
constexpr CounterRng episode_rng(std::uint64_t seed, std::uint64_t episode) noexcept {
  return CounterRng(derive_key(derive_key(0, seed), episode));
}

}  // namespace calf
