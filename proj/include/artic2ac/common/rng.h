// artic2ac/common/rng.h

// Copyright 2026  artic2ac authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef ARTIC2AC_COMMON_RNG_H_
#define ARTIC2AC_COMMON_RNG_H_

#include <cmath>
#include <cstdint>

namespace artic2ac {

// SplitMix64, after Sebastiano Vigna's public domain reference
// (http://xorshift.di.unimi.it/splitmix64.c). Every random draw in this
// project flows through this generator: it is exactly specified, trivially
// portable, and therefore keeps corpora and training runs reproducible
// across implementations.
class SplitMix64 {
 public:
  SplitMix64() : state_(0) {}
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) { return next() % n; }

  // Standard normal via Box-Muller. Draws two uniforms per call.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Stateless output function: one SplitMix64 step starting from x.
  static uint64_t hash(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  // Independent stream for item (a, b) under a master seed. Used so that
  // per-sentence / per-sample streams can be generated in parallel without
  // sharing generator state.
  static SplitMix64 derived(uint64_t seed, uint64_t a, uint64_t b) {
    uint64_t h = hash(seed);
    h = hash(h ^ ((a + 1) * 0x9e3779b97f4a7c15ull));
    h = hash(h ^ ((b + 1) * 0x9e3779b97f4a7c15ull));
    return SplitMix64(h);
  }

 private:
  uint64_t state_;
};

}  // namespace artic2ac

#endif  // ARTIC2AC_COMMON_RNG_H_
