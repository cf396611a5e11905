// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace lnchip::detail {

// SplitMix64 (Steele, Lea, Flood 2014). Used only for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed-splitting rule for sweeps: substream k of a master seed is
// splitmix64(master XOR (k+1)*golden_gamma). Sweep points may therefore be
// evaluated in any order without changing their draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ ((index + 1) * 0x9E3779B97F4A7C15ULL));
}

class CountSampler {
 public:
  explicit CountSampler(std::uint64_t seed) : engine_(seed) {}

  /// One Poisson draw with the given mean (mean 0 yields 0).
  long long poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<long long> dist(mean);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lnchip::detail
