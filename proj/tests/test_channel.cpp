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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "gecc/channel.hpp"

namespace gecc {
namespace {

SignalFrame random_bits(std::size_t n, std::uint64_t seed) {
  auto engine = TrialRng(seed, 0, 99).engine();
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('0' + (engine() & 1u));
  return SignalFrame::from_bits(s);
}

SignalFrame values(std::initializer_list<double> xs) {
  SignalFrame f;
  for (double x : xs) f.vectors.push_back(SignalVector({x}));
  return f;
}

std::vector<ErrorModel> length_preserving_models() {
  return {NoError{},       RandomFlip{0.2},        Burst{0.05, 4},
          Gaussian{{0.3}}, Offset{{1.5}},          Erasure{0.3},
          compose({RandomFlip{0.1}, Erasure{0.1}, Gaussian{{0.1}}})};
}

TEST(Apply, OffsetAddsToEveryValue) {
  const SignalFrame rx = apply(Offset{{2.0}}, values({5.0, -1.0}), TrialRng(1));
  EXPECT_EQ(rx, values({7.0, 1.0}));
}

TEST(Apply, OffsetPerDimension) {
  SignalFrame f{{SignalVector({1.0, 2.0, std::nullopt})}};
  const SignalFrame rx = apply(Offset{{1.0, -1.0, 5.0}}, f, TrialRng(1));
  EXPECT_EQ(rx.vectors[0], SignalVector({2.0, 1.0, std::nullopt}));
  EXPECT_THROW(apply(Offset{{1.0, 2.0}}, f, TrialRng(1)), ConfigError);
}

TEST(Apply, FlipExtremes) {
  const SignalFrame bits = SignalFrame::from_bits("0110100111");
  EXPECT_EQ(apply(RandomFlip{0.0}, bits, TrialRng(3)), bits);
  EXPECT_EQ(apply(RandomFlip{1.0}, bits, TrialRng(3)).to_string(), "1001011000");
}

TEST(Apply, FlipRejectsAnalogComponents) {
  EXPECT_THROW(apply(RandomFlip{1.0}, values({0.5}), TrialRng(1)), ConfigError);
}

TEST(Apply, GaussianMoments) {
  const std::size_t n = 100000;
  SignalFrame zeros;
  zeros.vectors.assign(n, SignalVector({0.0}));
  const SignalFrame rx = apply(Gaussian{{0.1}}, zeros, TrialRng(2024));
  double sum = 0.0, sq = 0.0;
  for (const auto& v : rx.vectors) {
    sum += *v[0];
    sq += *v[0] * *v[0];
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_LE(std::abs(mean), 3 * 0.1 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(var, 0.01, 0.05 * 0.01);
}

TEST(Apply, OmissionDropsWholeVectors) {
  const SignalFrame bits = random_bits(50, 1);
  EXPECT_TRUE(apply(Omission{1.0}, bits, TrialRng(4)).empty());
  EXPECT_EQ(apply(Omission{0.0}, bits, TrialRng(4)), bits);
  const SignalFrame kept = apply(Omission{0.5}, values({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), TrialRng(4));
  // survivors keep their relative order
  for (std::size_t i = 1; i < kept.length(); ++i) EXPECT_LT(*kept.vectors[i - 1][0], *kept.vectors[i][0]);
}

TEST(Apply, BurstFlipsContiguousRuns) {
  const SignalFrame zeros = SignalFrame::from_bits(std::string(200, '0'));
  const std::string rx = apply(Burst{1.0, 3}, zeros, TrialRng(5)).to_string();
  EXPECT_EQ(rx, std::string(200, '1'));
  const std::string sparse = apply(Burst{0.01, 4}, zeros, TrialRng(6)).to_string();
  // runs of ones are at least one burst long unless cut off at the end
  std::size_t i = 0;
  while (i < sparse.size()) {
    if (sparse[i] == '0') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < sparse.size() && sparse[j] == '1') ++j;
    EXPECT_TRUE(j - i >= 4 || j == sparse.size()) << sparse;
    i = j;
  }
}

TEST(Apply, RemapSubstitutesSymbols) {
  const Permutation pi = Permutation::cyclic_shift(4, 1);
  EXPECT_EQ(apply(Remap{pi}, values({0, 1, 2, 3}), TrialRng(1)), values({1, 2, 3, 0}));
  EXPECT_THROW(apply(Remap{pi}, values({7}), TrialRng(1)), ConfigError);
  EXPECT_THROW(apply(Remap{pi}, values({0.5}), TrialRng(1)), ConfigError);
}

TEST(Apply, RemapInverseRestoresAlphabet) {
  const Permutation pi({{1, 3}, {2, 1}, {3, 4}, {4, 2}});
  const SignalFrame f = values({1, 2, 3, 4, 4, 1});
  const SignalFrame there = apply(Remap{pi}, f, TrialRng(1));
  EXPECT_NE(there, f);
  EXPECT_EQ(apply(Remap{pi.inverse()}, there, TrialRng(1)), f);
}

TEST(Permutation, RejectsNonBijections) {
  EXPECT_THROW(Permutation({{0, 1}, {1, 1}}), ConfigError);
  EXPECT_THROW(Permutation(std::map<int, int>{{0, 5}}), ConfigError);
  EXPECT_EQ(Permutation::cyclic_shift(5, -1), Permutation::cyclic_shift(5, 4));
  EXPECT_EQ(Permutation::cyclic_shift(3, 3), Permutation::identity(3));
}

TEST(ErrorModel, ValidatesParameters) {
  EXPECT_THROW(ErrorModel(RandomFlip{1.5}), ConfigError);
  EXPECT_THROW(ErrorModel(RandomFlip{-0.1}), ConfigError);
  EXPECT_THROW(ErrorModel(Burst{0.1, 0}), ConfigError);
  EXPECT_THROW(ErrorModel(Gaussian{{-1.0}}), ConfigError);
  EXPECT_THROW(ErrorModel(Gaussian{{}}), ConfigError);
  EXPECT_THROW(ErrorModel(Offset{{}}), ConfigError);
  EXPECT_THROW(ErrorModel(Omission{2.0}), ConfigError);
  EXPECT_THROW(ErrorModel(Erasure{std::nan("")}), ConfigError);
  EXPECT_THROW(compose({}), ConfigError);
  try {
    ErrorModel m = RandomFlip{3.0};
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "p");
  }
}

TEST(Compose, InversePairIsIdentity) {
  const ErrorModel m = compose({Offset{{2.0}}, Offset{{-2.0}}});
  const SignalFrame f = values({0.25, -3.0, 1e6, 0.0});
  EXPECT_EQ(apply(m, f, TrialRng(9)), f);
}

TEST(Compose, SingleStageEqualsStage) {
  // a lone stage runs on sub-stream 0
  for (const auto& m : length_preserving_models()) {
    const SignalFrame f = random_bits(64, 3);
    for (std::uint64_t t = 0; t < 20; ++t) {
      const TrialRng rng(77, t);
      EXPECT_EQ(apply(compose({m}), f, rng), apply(m, f, rng.substream(0)));
    }
  }
}

TEST(Compose, AppliesStagesLeftToRight) {
  // offset then remap differs from remap then offset
  const ErrorModel a = compose({Offset{{1.0}}, Remap{Permutation::cyclic_shift(4, 1)}});
  const ErrorModel b = compose({Remap{Permutation::cyclic_shift(4, 1)}, Offset{{1.0}}});
  EXPECT_EQ(apply(a, values({0, 2}), TrialRng(1)), values({2, 0}));
  EXPECT_EQ(apply(b, values({0, 2}), TrialRng(1)), values({2, 4}));
}

TEST(Compose, FlipThenEraseRates) {
  const std::size_t n = 10000;
  const double p = 0.1, q = 0.2;
  const SignalFrame zeros = SignalFrame::from_bits(std::string(n, '0'));
  const SignalFrame rx = apply(compose({RandomFlip{p}, Erasure{q}}), zeros, TrialRng(31));
  std::size_t erased = 0, flipped = 0;
  for (const auto& v : rx.vectors) {
    if (!v[0]) ++erased;
    else if (*v[0] == 1.0) ++flipped;
  }
  const std::size_t live = n - erased;
  EXPECT_NEAR(static_cast<double>(erased) / n, q, 3 * std::sqrt(q * (1 - q) / n));
  EXPECT_NEAR(static_cast<double>(flipped) / live, p, 3 * std::sqrt(p * (1 - p) / live));
}

TEST(Properties, Determinism) {
  const SignalFrame f = random_bits(256, 8);
  for (const auto& m : length_preserving_models())
    for (std::uint64_t t = 0; t < 10; ++t) EXPECT_EQ(apply(m, f, TrialRng(5, t)), apply(m, f, TrialRng(5, t)));
  const ErrorModel drop = Omission{0.3};
  EXPECT_EQ(apply(drop, f, TrialRng(5, 1)), apply(drop, f, TrialRng(5, 1)));
  EXPECT_NE(apply(RandomFlip{0.5}, f, TrialRng(5, 1)), apply(RandomFlip{0.5}, f, TrialRng(5, 2)));
}

TEST(Properties, OnlyOmissionChangesLength) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SignalFrame f = random_bits(100 + seed, seed);
    for (const auto& m : length_preserving_models()) EXPECT_EQ(apply(m, f, TrialRng(seed)).length(), f.length());
  }
}

TEST(Properties, ErasuresPersist) {
  SignalFrame f = random_bits(300, 12);
  for (std::size_t i = 0; i < f.length(); i += 3) f.vectors[i][0].reset();
  std::vector<ErrorModel> models = length_preserving_models();
  models.push_back(Remap{Permutation({{0, 1}, {1, 0}})});
  for (const auto& m : models) {
    const SignalFrame rx = apply(m, f, TrialRng(6));
    for (std::size_t i = 0; i < f.length(); i += 3) EXPECT_FALSE(rx.vectors[i][0].has_value());
  }
}

TEST(Properties, OffsetInvertible) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto engine = TrialRng(seed).engine();
    SignalFrame f;
    for (int i = 0; i < 20; ++i) f.vectors.push_back(SignalVector({std::ldexp(static_cast<double>(engine() % 4096), -4)}));
    const double b = std::ldexp(static_cast<double>(engine() % 512), -3);
    EXPECT_EQ(apply(Offset{{-b}}, apply(Offset{{b}}, f, TrialRng(seed)), TrialRng(seed)), f);
  }
}

TEST(Properties, RemapRoundTripOnAllPermutationsOfFour) {
  std::vector<int> image{0, 1, 2, 3};
  int count = 0;
  do {
    std::map<int, int> m;
    for (int i = 0; i < 4; ++i) m[i] = image[static_cast<std::size_t>(i)];
    const Permutation pi(m);
    const SignalFrame f = values({0, 1, 2, 3, 3, 2});
    EXPECT_EQ(apply(Remap{pi.inverse()}, apply(Remap{pi}, f, TrialRng(1)), TrialRng(1)), f);
    ++count;
  } while (std::next_permutation(image.begin(), image.end()));
  EXPECT_EQ(count, 24);
}

TEST(SignalFrame, TextForms) {
  EXPECT_EQ(SignalFrame::from_bits("0110").to_string(), "0110");
  SignalFrame words{{SignalVector::parse("0110"), SignalVector::parse("1?00")}};
  EXPECT_EQ(words.to_string(), "0110 1?00");
  EXPECT_EQ(values({0.5, 2}).to_string(), "0.5 | 2");
}

}  // namespace
}  // namespace gecc
