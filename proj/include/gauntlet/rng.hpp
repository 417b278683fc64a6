// Copyright 2026 The Forecast Gauntlet Authors
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

// Reproducible randomness.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// Distributions are implemented here rather than taken from <random>, whose
// algorithms differ between standard libraries.
//
// Sub-streams: seed = splitmix64(fnv1a64(le64(seed) || scene_id || 0x00 || stage)).

#ifndef GAUNTLET__RNG_HPP_
#define GAUNTLET__RNG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace gauntlet
{

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL)
{
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view scene_id, std::string_view stage)
{
  char le[8];
  for (int i = 0; i < 8; ++i) {le[i] = static_cast<char>((seed >> (8 * i)) & 0xFF);}
  std::uint64_t h = fnv1a64(std::string_view(le, 8));
  h = fnv1a64(scene_id, h);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(stage, h);
  return splitmix64(h);
}

class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::string_view scene_id, std::string_view stage)
  {
    return Rng(derive_seed(seed, scene_id, stage));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n), rejection-sampled; n > 0.
  std::uint64_t index(std::uint64_t n)
  {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /**
   * Poisson by Knuth's product method, applied in chunks of mean <= 64 so
   * exp(-mean) never underflows. For a fixed stream and mean <= 64 the result
   * is non-decreasing in `mean`.
   */
  std::uint64_t poisson(double mean)
  {
    std::uint64_t total = 0;
    while (mean > 0.0) {
      const double chunk = std::min(mean, 64.0);
      mean -= chunk;
      const double limit = std::exp(-chunk);
      double prod = uniform01();
      while (prod >= limit) {
        ++total;
        prod *= uniform01();
      }
    }
    return total;
  }

  template<typename T>
  void shuffle(std::vector<T> & v)
  {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(index(i))]);
    }
  }

private:
  std::mt19937_64 engine_;
  double spare_{0.0};
  bool has_spare_{false};
};

}  // namespace gauntlet

#endif  // GAUNTLET__RNG_HPP_
