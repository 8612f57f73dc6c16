// Copyright 2026 The Blindgait Authors
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

#ifndef BLINDGAIT_RNG_HPP_
#define BLINDGAIT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "blindgait/types.hpp"

namespace blindgait {

/// splitmix64 mixing step; used to derive stream seeds and lattice hashes
/// reproducibly across platforms.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream with explicit distributions so that sequences are
/// bit-reproducible for a given seed regardless of the standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) { this->seed(seed); }

  /// Derive an independent child stream; (seed, index) pairs never collide
  /// in practice thanks to the splitmix64 mix.
  Rng spawn(uint64_t index) const {
    return Rng(splitmix64(seed_mix_ ^ (0x632be59bd9b4e019ULL * (index + 1))));
  }

  void seed(uint64_t s) {
    seed_mix_ = s;
    engine_.seed(splitmix64(s));
    has_spare_ = false;
  }

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return (next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  Vec3 normal_vec3(double stddev) {
    return Vec3(normal() * stddev, normal() * stddev, normal() * stddev);
  }

 private:
  std::mt19937_64 engine_;
  uint64_t seed_mix_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace blindgait

#endif  // BLINDGAIT_RNG_HPP_
