// include/phmm/prng.h

// Copyright 2026  PHMM Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef PHMM_PRNG_H_
#define PHMM_PRNG_H_

#include <cmath>
#include <cstdint>

namespace phmm {

// SplitMix64: a counter-based 64-bit generator (Steele et al., the mixing
// function of Java's SplittableRandom).  Output i is a fixed bijective hash
// of seed + i * golden_gamma, so streams are reproducible on any platform
// independent of the standard library.  All corpus synthesis and k-means
// initialisation goes through this class; std::mt19937 and the std
// distributions are deliberately not used anywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t NextU64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double NextDouble() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double NextUniform(double lo, double hi) {
    return lo + NextDouble() * (hi - lo);
  }

  // Unbiased integer in [0, n); n must be > 0.
  std::uint64_t NextBelow(std::uint64_t n) {
    std::uint64_t min = (0 - n) % n;  // 2^64 mod n
    std::uint64_t r;
    do {
      r = NextU64();
    } while (r < min);
    return r % n;
  }

  // Standard normal via the Marsaglia polar method (sqrt/log only, which
  // keeps the stream identical across libm implementations in practice).
  double NextGaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * NextDouble() - 1.0;
      v = 2.0 * NextDouble() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stable derived seed for independent substreams (per line, per restart...).
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t salt) {
  return SplitMix64::Mix(seed ^ (salt * 0x9e3779b97f4a7c15ULL +
                                 0xd1b54a32d192ed03ULL));
}

}  // namespace phmm

#endif  // PHMM_PRNG_H_
