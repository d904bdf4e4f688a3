// Copyright 2026 The subsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SUBSEL_RNG_HPP_
#define SUBSEL_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "subsel/error.hpp"

namespace subsel {

// Seeded random stream used by every sampling path.
//
// mt19937_64 has a standardized output sequence, and the bounded draws below
// avoid std::uniform_int_distribution, whose mapping from raw bits to a range
// is implementation defined. Identical seeds therefore give identical samples
// on every platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform draw from [0, n). Rejection sampling, no modulo bias.
  uint64_t next_below(uint64_t n) {
    internal_check(n > 0, "Rng::next_below called with n = 0");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [0, 1), 53 bits of resolution.
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Inclusive integer range.
  int64_t next_int(int64_t lo, int64_t hi) {
    internal_check(lo <= hi, "Rng::next_int empty range");
    return lo + static_cast<int64_t>(
                    next_below(static_cast<uint64_t>(hi - lo) + 1));
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 finalizer (Steele, Lea, Flood; public-domain reference constants).
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for replicate `index` under `base_seed`. Replicate i gets the same
// seed no matter which other replicates run, and distinct indices always get
// distinct seeds (the pre-mix value is injective in index).
inline uint64_t derive_seed(uint64_t base_seed, uint64_t index) {
  return mix64(base_seed + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

}  // namespace subsel

#endif  // SUBSEL_RNG_HPP_
