// Copyright 2026 The amem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace amem {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// Output function of splitmix64 applied to an already-advanced state.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One splitmix64 step from state `x`: advance by the golden gamma, then mix.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  return splitmix64_mix(x + kGoldenGamma);
}

// FNV-1a, used to derive per-name sub-streams from a master seed.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sequential splitmix64 stream. Every random draw in the project goes through
/// this type so results are identical across platforms and standard libraries.
class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += kGoldenGamma;
    return splitmix64_mix(state_);
  }

  // Uniform integer in [0, n). Modulo bias is below 2^-50 for the n used here.
  constexpr std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(next() % n);
  }

  // Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  constexpr bool bernoulli(double p) { return uniform() < p; }

  constexpr std::uint64_t state() const { return state_; }

  // Independent child stream keyed by a label.
  constexpr SplitMix64 fork(std::string_view label) const {
    return SplitMix64(splitmix64(state_ ^ fnv1a64(label)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace amem
