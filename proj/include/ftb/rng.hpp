// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Counter-based pseudo-random streams keyed by (seed, step, index), so every
// sample draws from its own stream and results do not depend on scheduling.
#pragma once

#include <cstdint>

namespace ftb {

class Rng {
 public:
  // splitmix64 output finalizer; also used to hash the stream key together.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

  // Independent stream for sample `index` of step `step` under `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t step, std::uint64_t index) {
    Rng r(0);
    r.state_ = mix(mix(mix(seed) ^ step) ^ index);
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace ftb
