// Copyright 2026 The gecc Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <random>

namespace gecc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Key for one trial's randomness. Engines are derived from (seed, trial,
// stream) only, so results never depend on scheduling order.
class TrialRng {
 public:
  using Engine = std::mt19937_64;

  constexpr TrialRng(std::uint64_t seed = 0, std::uint64_t trial = 0,
                     std::uint64_t stream = 0) noexcept
      : seed_(seed), trial_(trial), stream_(stream) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }
  constexpr std::uint64_t trial() const noexcept { return trial_; }

  // Independent child stream, e.g. one per stage of a composed model.
  constexpr TrialRng substream(std::uint64_t index) const noexcept {
    return TrialRng(seed_, trial_, splitmix64(stream_ ^ splitmix64(index + 1)));
  }

  Engine engine() const {
    std::uint64_t k = splitmix64(seed_);
    k = splitmix64(k ^ trial_);
    k = splitmix64(k ^ stream_);
    return Engine(k);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t trial_;
  std::uint64_t stream_;
};

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
inline double uniform01(TrialRng::Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace gecc
