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
#include <bit>
#include <cmath>
#include <numeric>

#include "gecc/feedback.hpp"

namespace gecc {
namespace {

TEST(Delta, ReferenceMinusFeedback) {
  EXPECT_EQ(delta(5, 5), 0);
  EXPECT_EQ(delta(5, 7), -2);
  EXPECT_EQ(delta(0, -3), 3);
}

TEST(Modulate, ExamplesAndRoundTrip) {
  EXPECT_TRUE(modulate(0.0, 1.0).empty());
  EXPECT_EQ(modulate(2.0, 1.0).bits(), "010");
  EXPECT_EQ(modulate(-2.0, 1.0).bits(), "110");
  EXPECT_TRUE(modulate(0.0004, 1e-3).empty());
  auto engine = TrialRng(11).engine();
  for (int i = 0; i < 2000; ++i) {
    const double q = std::pow(10.0, -1.0 - 3.0 * uniform01(engine));
    const double d = (uniform01(engine) - 0.5) * 2000.0;
    const VirtualBox box = modulate(d, q);
    EXPECT_LE(std::fabs(demodulate(box, q) - d), q / 2 * (1 + 1e-9));
    // oracle: sign bit plus the bit width of the magnitude
    const auto magnitude = static_cast<std::uint64_t>(std::llround(std::fabs(d) / q));
    EXPECT_EQ(box.fill(), magnitude == 0 ? 0u : 1u + static_cast<unsigned>(std::bit_width(magnitude)));
  }
}

TEST(Modulate, Errors) {
  EXPECT_THROW(modulate(1.0, 0.0), ConfigError);
  EXPECT_THROW(modulate(1e30, 1e-3), ConfigError);
  EXPECT_THROW(modulate(1000.0, 1.0, 4), ConfigError);
}

SessionConfig config(double reference, std::size_t delay, double plant = 0.0) {
  SessionConfig c;
  c.reference = reference;
  c.initial_plant = plant;
  c.delay = delay;
  return c;
}

TEST(Session, OffsetReceiverReachesReferenceInOneRound) {
  const ErrorFunction e = AffineMap{1.0, 2.0};
  Session s(config(5.0, 0), e, {e.inverse(), true});
  s = step(s);
  EXPECT_NEAR(demodulate(s.forward_boxes()[0], s.config().q), 3.0, 1e-12);
  s = step(s);
  EXPECT_NEAR(s.plant(), 5.0, 1e-12);
}

TEST(Session, ConvergesWithinTwoDelaysPlusOne) {
  auto engine = TrialRng(5).engine();
  for (std::size_t delay = 0; delay <= 5; ++delay)
    for (int k = 0; k < 40; ++k) {
      const double gain = (0.1 + 0.9 * uniform01(engine)) * (engine() & 1u ? 1 : -1);
      const ErrorFunction e = AffineMap{gain, (uniform01(engine) - 0.5) * 20};
      const double reference = (uniform01(engine) - 0.5) * 100;
      Session s(config(reference, delay), e, {e.inverse(), true});
      for (std::size_t r = 0; r <= 2 * delay + 1; ++r) s.advance();
      EXPECT_LE(std::fabs(s.plant() - reference), s.config().q / 2) << delay << " " << k;
      const std::size_t settled = s.forward_boxes().size();
      for (int r = 0; r < 10; ++r) s.advance();
      for (std::size_t i = settled; i < s.forward_boxes().size(); ++i) EXPECT_TRUE(s.forward_boxes()[i].empty());
    }
}

TEST(Session, SilentAtEquilibrium) {
  Session s(config(7.0, 2, 7.0), IdentityMap{}, {IdentityMap{}, true});
  for (int r = 0; r < 10; ++r) s = step(s);
  EXPECT_EQ(s.forward_boxes().size(), 10u);
  EXPECT_EQ(s.backward_boxes(), 10u);
  std::size_t bits = 0;
  for (const auto& b : s.forward_boxes()) bits += b.fill();
  EXPECT_EQ(bits, 0u);
  EXPECT_EQ(s.rounds(), 10u);
}

TEST(Session, LogLengthAndDelayedArrival) {
  for (std::size_t delay = 0; delay < 4; ++delay) {
    Session s(config(1.0, delay), IdentityMap{}, {IdentityMap{}, true});
    for (std::size_t r = 0; r < 2 * delay + 3; ++r) {
      s.advance();
      EXPECT_EQ(s.log().size(), r + 1);
      // the first correction is sent at round delay and acts at 2*delay + 1
      EXPECT_EQ(s.log().back().plant, r >= 2 * delay + 1 ? 1.0 : 0.0) << delay << " " << r;
    }
  }
}

std::vector<unsigned> fills_after_step(std::size_t delay, double gain, double disturbance) {
  SessionConfig c = config(0.0, delay);
  c.gain = gain;
  Session s(c, IdentityMap{}, {IdentityMap{}, true});
  for (std::size_t r = 0; r < 60; ++r) s.advance(r == 10 ? std::optional<double>(disturbance) : std::nullopt);
  std::vector<unsigned> fills;
  for (const auto& l : s.log()) fills.push_back(l.fill_bits);
  // a partial-gain quantized controller stops once gain * delta rounds to zero
  EXPECT_NEAR(s.plant(), 0.0, c.q / (2 * gain) + 1e-12);
  return fills;
}

TEST(Session, StepDisturbanceBurstsThenDecays) {
  for (std::size_t delay : {0u, 1u, 3u})
    for (double gain : {1.0, 0.5}) {
      const auto fills = fills_after_step(delay, gain, 4.25);
      const std::size_t burst = 10 + delay;
      for (std::size_t r = 0; r < burst; ++r) EXPECT_EQ(fills[r], 0u) << r;
      EXPECT_GT(fills[burst], 0u);
      for (std::size_t r = burst + 1; r < fills.size(); ++r) EXPECT_LE(fills[r], fills[r - 1]) << r;
      EXPECT_EQ(fills.back(), 0u);
    }
}

TEST(Session, PayloadBitsMatchTheQuantizedCorrection) {
  for (double d : {4.25, -0.75, 1234.5}) {
    const auto fills = fills_after_step(2, 1.0, d);
    const auto magnitude = static_cast<std::uint64_t>(std::llround(std::fabs(d) / 1e-3));
    EXPECT_EQ(std::accumulate(fills.begin(), fills.end(), 0u), 1u + std::bit_width(magnitude));
  }
  EXPECT_EQ(std::ranges::max(fills_after_step(2, 1.0, 0.0)), 0u);
}

TEST(Session, Csv) {
  Session s(config(1.0, 0), IdentityMap{}, {IdentityMap{}, true});
  s.advance();
  EXPECT_EQ(to_csv(s.log()), "round,delta,fill_bits,plant_value,lag\n0,1,11,0,\n");
}

TEST(Session, RejectsBadConfig) {
  EXPECT_THROW(Session(config(0, 0), SymbolMap{Permutation::identity(2)}), ConfigError);
  SessionConfig c;
  c.q = 0;
  EXPECT_THROW(Session(c, IdentityMap{}), ConfigError);
  EXPECT_THROW(ErrorFunction(AffineMap{0.0, 1.0}), ConfigError);
}

TEST(Identify, OffsetReceiver) {
  Session s(config(0, 0), AffineMap{1.0, 2.0});
  const InverseModel m = identify_error_model(s, ErrorFamily::Affine);
  EXPECT_TRUE(m.identified);
  EXPECT_EQ(m.function, ErrorFunction(AffineMap{1.0, -2.0}));
  EXPECT_EQ(s.probes(), 2u);
}

TEST(Identify, IdentityReceiver) {
  std::size_t probes = 0;
  EXPECT_EQ(identify_error_model(IdentityMap{}, ErrorFamily::Affine, {}, &probes).function, ErrorFunction(IdentityMap{}));
  EXPECT_EQ(probes, 2u);
}

TEST(Identify, RandomAffineReceivers) {
  auto engine = TrialRng(1000).engine();
  for (int i = 0; i < 1000; ++i) {
    const double a = (0.1 + 9.9 * uniform01(engine)) * (engine() & 1u ? 1 : -1);
    const ErrorFunction e = AffineMap{a, (uniform01(engine) - 0.5) * 200};
    std::size_t probes = 0;
    const InverseModel m = identify_error_model(e, ErrorFamily::Affine, {}, &probes);
    EXPECT_EQ(probes, 2u);
    for (double x : {-5.0, 0.0, 3.0, 1.0}) EXPECT_NEAR(m.function(e(x)), x, 1e-9);
  }
}

TEST(Identify, EveryRemapOfFourSymbols) {
  std::vector<int> perm{0, 1, 2, 3};
  int count = 0;
  do {
    std::map<int, int> m;
    for (int s = 0; s < 4; ++s) m[s] = perm[static_cast<std::size_t>(s)];
    const ErrorFunction e = SymbolMap{Permutation(m)};
    std::size_t probes = 0;
    const InverseModel inv = identify_error_model(e, ErrorFamily::Remap, {0, 1, 2, 3}, &probes);
    EXPECT_EQ(probes, 4u);
    for (int s = 0; s < 4; ++s) EXPECT_EQ(inv.function(e(s)), s);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_EQ(count, 24);
}

TEST(Identify, FlatResponseIsRejected) {
  EXPECT_THROW(detail::identify([](double) { return 4.0; }, ErrorFamily::Affine, {}), ConfigError);
  EXPECT_THROW(detail::identify([](double) { return 1.0; }, ErrorFamily::Remap, {0, 1}), ConfigError);
  EXPECT_THROW(identify_error_model(IdentityMap{}, ErrorFamily::Remap), ConfigError);
}

TEST(RamMonitor, PatchRestoresMemory) {
  auto engine = TrialRng(3).engine();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + engine() % 300;
    std::vector<bool> backup(n), mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      backup[i] = engine() & 1u;
      mask[i] = uniform01(engine) < 0.05;
    }
    std::vector<bool> memory(n);
    for (std::size_t i = 0; i < n; ++i) memory[i] = backup[i] != mask[i];
    const RamPatch p = ram_monitor(memory, backup);
    std::vector<std::size_t> flipped;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) flipped.push_back(i);
    EXPECT_EQ(p.positions, flipped);
    std::vector<double> a(memory.begin(), memory.end()), b(backup.begin(), backup.end());
    EXPECT_EQ(static_cast<double>(p.patch_bits), squared_distance(SignalVector::from_values(a), b));
    apply_patch(memory, p);
    EXPECT_EQ(memory, backup);
  }
}

TEST(RamMonitor, EdgeCases) {
  const std::vector<bool> v{true, false, true, true};
  EXPECT_TRUE(ram_monitor(v, v).positions.empty());
  const std::vector<bool> inv{false, true, false, false};
  const RamPatch all = ram_monitor(inv, v);
  EXPECT_EQ(all.patch_bits, 4u);
  EXPECT_EQ(all.address_bits, 8u);
  EXPECT_THROW(ram_monitor(v, {true}), ConfigError);
}

TEST(Adapter, IdentityHasNoLag) {
  for (const auto& r : run_adapter_scenario(Permutation::identity(4), 100)) EXPECT_EQ(r.lag, 0);
}

TEST(Adapter, ShiftWithoutAdapterLagsByOne) {
  for (const auto& r : run_adapter_scenario(Permutation::cyclic_shift(4, 1), 100)) EXPECT_EQ(r.lag, 1);
}

TEST(Adapter, AdapterRemovesTheLag) {
  const auto trace = run_adapter_scenario(Permutation::cyclic_shift(4, 1), 100, 50);
  ASSERT_EQ(trace.size(), 100u);
  for (const auto& r : trace) EXPECT_EQ(r.lag, r.round <= 50 ? 1 : 0) << r.round;
}

TEST(Adapter, EveryPermutationIsRepaired) {
  std::vector<int> perm{0, 1, 2, 3};
  do {
    std::map<int, int> m;
    for (int s = 0; s < 4; ++s) m[s] = perm[static_cast<std::size_t>(s)];
    const auto trace = run_adapter_scenario(Permutation(m), 20, 5);
    for (const auto& r : trace)
      if (r.round > 5) {
        EXPECT_EQ(r.lag, 0);
      }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST(Adapter, Errors) {
  EXPECT_THROW(run_adapter_scenario(Permutation::identity(3), 10), ConfigError);
  EXPECT_THROW(run_adapter_scenario(Permutation::identity(4), 0), ConfigError);
  EXPECT_THROW(Permutation({{0, 1}, {1, 1}}), ConfigError);
}

TEST(ResolveAmbiguity, MoodBiasedPoolCompletes) {
  ContextPool pool({"blue:as_colored", "blue:as_mood"});
  for (int i = 0; i < 50; ++i) pool.observe("blue:as_mood");
  const Resolution r = resolve_ambiguity("blue", pool);
  ASSERT_TRUE(std::holds_alternative<Completed>(r));
  EXPECT_EQ(std::get<Completed>(r).symbol, "blue:as_mood");
}

TEST(ResolveAmbiguity, UniqueCompletion) {
  ContextPool pool({"blue:as_colored", "red"});
  for (int i = 0; i < 50; ++i) pool.observe("blue:as_colored");
  const Resolution r = resolve_ambiguity("re", pool);
  ASSERT_TRUE(std::holds_alternative<Completed>(r));
  EXPECT_EQ(std::get<Completed>(r).symbol, "red");
}

TEST(ResolveAmbiguity, EmptyPoolAsksForMore) {
  const ContextPool pool({"blue:as_colored", "blue:as_mood"});
  const Resolution r = resolve_ambiguity("blue", pool);
  ASSERT_TRUE(std::holds_alternative<RequestMore>(r));
  EXPECT_EQ(std::get<RequestMore>(r).suffixes, (std::vector<std::string>{":as_colored", ":as_mood"}));
  EXPECT_THROW(resolve_ambiguity("green", pool), ConfigError);
}

}  // namespace
}  // namespace gecc
