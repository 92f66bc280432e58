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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gecc/harness.hpp"

namespace gecc {
namespace {

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(error_path({{"trials", 0}}), "trials");
  EXPECT_EQ(error_path({{"trials", -3}}), "trials");
  EXPECT_EQ(error_path({{"seed", "x"}}), "seed");
  EXPECT_EQ(error_path({{"bogus", 1}}), "bogus");
  EXPECT_EQ(error_path({{"format", "xml"}}), "format");
  EXPECT_EQ(error_path({{"error_model", {{"type", "random_flip"}}}}), "error_model.p");
  EXPECT_EQ(error_path({{"error_model", {{"type", "random_flip"}, {"p", 1.5}}}}), "error_model.p");
  EXPECT_EQ(error_path({{"error_model", {{"type", "warp"}}}}), "error_model.type");
  EXPECT_EQ(error_path({{"error_model", {{"type", "remap"}, {"mapping", {{"0", 1}, {"1", 1}}}}}}), "error_model.mapping");
  EXPECT_EQ(error_path({{"error_model", {{"type", "compose"}, {"stages", {{{"type", "erasure"}}}}}}}),
            "error_model.stages.0.p_erase");
  EXPECT_EQ(error_path({{"stack", {{"layers", {{{"type", "tags"}}, {{"type", "quantum"}}}}}}}), "stack.layers.1.type");
  EXPECT_EQ(error_path({{"stack", {{"layers", {{{"type", "hamming74"}, {"radius", -1}}}}}}}), "stack.layers.0.radius");
  EXPECT_EQ(error_path({{"stack", {{"profile", "sideways"}}}}), "stack.profile");
  EXPECT_EQ(error_path({{"message", {{"type", "random-bits"}, {"length", 0}}}}), "message.length");
  EXPECT_EQ(error_path({{"sweep", {{"error_model.p", json::array()}}}}), "sweep.error_model.p");
  EXPECT_EQ(error_path({{"seed", 3}}), "<accepted>");
}

TEST(Config, MessageMentionsThePath) {
  try {
    parse_config({{"error_model", {{"type", "random_flip"}}}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("error_model.p: ", 0), 0u) << e.what();
  }
}

json sample() {
  return {{"seed", 99},
          {"trials", 40},
          {"workers", 3},
          {"stack", {{"layers", {{{"type", "checksum"}, {"policy", "pass-residual"}}, {{"type", "hamming74"}}}}}},
          {"error_model",
           {{"type", "compose"},
            {"stages", {{{"type", "random_flip"}, {"p", 0.02}}, {{"type", "burst"}, {"p_start", 0.001}, {"length", 3}}}}}},
          {"message", {{"type", "random-bytes"}, {"length", 6}}},
          {"sweep", {{{"parameter", "error_model.stages.0.p"}, {"values", {0.0, 0.01, 0.05}}}}},
          {"format", "json"}};
}

TEST(Config, RoundTripsToAnIdenticalRun) {
  const ScenarioConfig a = parse_config(sample());
  const ScenarioConfig b = parse_config(json::parse(to_json(a).dump()));
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(to_csv(sweep(a)), to_csv(sweep(b)));
}

TEST(Config, LoadsFromFile) {
  const auto file = std::filesystem::temp_directory_path() / "gecc_harness_config.json";
  std::ofstream(file) << sample().dump(2);
  EXPECT_EQ(to_json(load_config(file.string())), to_json(parse_config(sample())));
  std::ofstream(file) << "{ not json";
  EXPECT_THROW(load_config(file.string()), ConfigError);
  std::filesystem::remove(file);
  EXPECT_THROW(load_config(file.string()), ConfigError);
}

TEST(Config, ErrorModelsRoundTrip) {
  for (const json& m : {json{{"type", "none"}}, json{{"type", "gaussian"}, {"sigma", {0.1, 0.2}}},
                        json{{"type", "offset"}, {"b", {1.0}}}, json{{"type", "omission"}, {"p_drop", 0.1}},
                        json{{"type", "remap"}, {"mapping", {{"0", 1}, {"1", 0}}}}})
    EXPECT_EQ(to_json(parse_error_model(m)), m);
}

TEST(MonteCarlo, NullModelHasNoResidual) {
  ScenarioConfig c = parse_config(sample());
  c.error_model = {{"type", "none"}};
  const SweepRow r = run_monte_carlo(c);
  EXPECT_EQ(r.counts.trials, 40u);
  EXPECT_EQ(r.residual_rate(), 0.0);
  EXPECT_EQ(r.raw_rate(), 0.0);
  EXPECT_GE(r.overhead_ratio(), 1.0);
}

TEST(MonteCarlo, RejectsZeroTrials) {
  ScenarioConfig c;
  c.trials = 0;
  EXPECT_THROW(run_monte_carlo(c), ConfigError);
}

TEST(MonteCarlo, DeterministicAndWorkerInvariant) {
  ScenarioConfig c = parse_config(sample());
  c.workers = 1;
  const std::string one = to_csv(sweep(c));
  EXPECT_EQ(one, to_csv(sweep(c)));
  for (unsigned w : {2u, 5u, 64u}) {
    c.workers = w;
    EXPECT_EQ(to_csv(sweep(c)), one) << w;
  }
}

TEST(MonteCarlo, BatchesFoldToTheSameTotals) {
  const ScenarioConfig c = parse_config(sample());
  const Stack stack = parse_stack(c.stack);
  const ErrorModel model = parse_error_model(json{{"type", "random_flip"}, {"p", 0.03}});
  std::vector<TrialCounts> per(30);
  for (std::uint64_t t = 0; t < per.size(); ++t) per[t] = run_trial(stack, model, c.message, c.seed, t);
  TrialCounts forward, backward, grouped;
  for (const auto& p : per) forward += p;
  for (auto it = per.rbegin(); it != per.rend(); ++it) backward += *it;
  for (std::size_t g = 0; g < per.size(); g += 7) {
    TrialCounts batch;
    for (std::size_t t = g; t < std::min(per.size(), g + 7); ++t) batch += per[t];
    grouped += batch;
  }
  EXPECT_EQ(forward, backward);
  EXPECT_EQ(forward, grouped);
}

TEST(MonteCarlo, HammingResidualMatchesAnalyticRate) {
  ScenarioConfig c;
  c.seed = 2024;
  c.trials = 1000;
  c.workers = 4;
  c.error_model = {{"type", "random_flip"}, {"p", 0.01}};
  c.message = {MessageSpec::Kind::RandomBytes, 5, {}};  // 10 words per trial
  const SweepRow r = run_monte_carlo(c);
  ASSERT_EQ(r.counts.residual_units, 10000u);
  const double p = 0.01;
  const double analytic = 1 - std::pow(1 - p, 7) - 7 * p * std::pow(1 - p, 6);
  const double sd = std::sqrt(analytic * (1 - analytic) / 10000.0);
  EXPECT_NEAR(r.residual_rate(), analytic, 3 * sd);
}

TEST(MonteCarlo, HalfWidthIsRecomputable) {
  ScenarioConfig c = parse_config(sample());
  c.error_model = {{"type", "random_flip"}, {"p", 0.05}};
  const SweepRow r = run_monte_carlo(c);
  const double n = static_cast<double>(r.counts.residual_units), k = static_cast<double>(r.counts.residual_errors);
  EXPECT_DOUBLE_EQ(r.half_width(), 2.5758293035489004 * std::sqrt(k / n * (1 - k / n) / n));
  EXPECT_EQ(half_width_99(0, 100), 0.0);
}

double majority5(double p) {
  double sum = 0;
  for (int k = 3; k <= 5; ++k) sum += std::tgamma(6) / (std::tgamma(k + 1) * std::tgamma(6 - k)) * std::pow(p, k) * std::pow(1 - p, 5 - k);
  return sum;
}

ScenarioConfig repetition(std::uint64_t k) {
  ScenarioConfig c;
  c.seed = 5;
  c.trials = 100;
  c.workers = 4;
  c.stack = k == 1 ? json{{"layers", {{{"type", "raw"}}}}} : json{{"layers", {{{"type", "repetition"}, {"k", k}}}}};
  c.error_model = {{"type", "random_flip"}, {"p", 0.0}};
  c.message = {MessageSpec::Kind::RandomBytes, 50, {}};  // 400 bits per trial
  return c;
}

std::vector<json> values(const std::vector<double>& v) { return {v.begin(), v.end()}; }

double noise_of(const SweepRow& r) { return r.point.front().second.get<double>(); }

TEST(Sweep, RowsFollowGridOrder) {
  ScenarioConfig c = parse_config(sample());
  const auto rows = sweep(c, {{"error_model.stages.0.p", values({0.0, 0.1})}, {"seed", {json(1), json(2), json(3)}}});
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].point[0].second.get<double>(), i < 3 ? 0.0 : 0.1);
    EXPECT_EQ(rows[i].point[1].second.get<int>(), static_cast<int>(i % 3) + 1);
  }
  const std::string csv = to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find(',', csv.find(',') + 1)), "error_model.stages.0.p,seed");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Sweep, NullModelGrid) {
  ScenarioConfig c = repetition(5);
  c.error_model = {{"type", "none"}};
  const auto rows = sweep(c, {{"trials", {json(1), json(2), json(3)}}});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].residual_rate(), 0.0);
  EXPECT_EQ(rows[2].counts.trials, 3u);
}

TEST(Sweep, Errors) {
  const ScenarioConfig c = repetition(5);
  EXPECT_THROW(sweep(c, {}), ConfigError);
  EXPECT_THROW(sweep(c, {{"error_model.p", {}}}), ConfigError);
  EXPECT_THROW(sweep(c, {{"error_model.p", values({2.0})}}), ConfigError);
  EXPECT_THROW(sweep(c, {{"trials.deeper", {json(1)}}}), ConfigError);
}

TEST(Sweep, RepetitionResidualTracksMajorityFormula) {
  const std::vector<double> ps{0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  const auto rows = sweep(repetition(5), {{"error_model.p", values(ps)}});
  double previous = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double n = static_cast<double>(rows[i].counts.residual_units);
    const double expect = majority5(ps[i]);
    EXPECT_NEAR(rows[i].residual_rate(), expect, 3 * std::sqrt(expect * (1 - expect) / n) + 1e-12) << ps[i];
    EXPECT_GE(rows[i].residual_rate(), previous) << ps[i];
    previous = rows[i].residual_rate();
  }
}

TEST(Sweep, ResidualNeverExceedsRawForCorrectingCodes) {
  for (const json& stack : {json{{"layers", {{{"type", "hamming74"}}}}}, json{{"layers", {{{"type", "repetition"}, {"k", 3}}}}}}) {
    ScenarioConfig c = repetition(3);
    c.stack = stack;
    for (const auto& r : sweep(c, {{"error_model.p", values({0.001, 0.01, 0.1, 0.3, 0.45})}})) {
      EXPECT_LE(r.residual_rate(), r.raw_symbol_rate() + r.half_width());
      EXPECT_GE(r.overhead_ratio(), 1.0);
    }
  }
}

TEST(Sweep, ProtectionMovesTheCrossingPoint) {
  std::vector<double> grid;
  for (double p = 0.001; p < 0.2; p *= 1.15) grid.push_back(p);
  const auto raw = sweep(repetition(1), {{"error_model.p", values(grid)}});
  const auto protected5 = sweep(repetition(5), {{"error_model.p", values(grid)}});
  const auto x_raw = crossing(raw, 1e-2, noise_of), x_rep = crossing(protected5, 1e-2, noise_of);
  ASSERT_TRUE(x_raw && x_rep);
  EXPECT_GE(*x_rep, 2 * *x_raw);
}

TEST(Crossing, InterpolatesBetweenPoints) {
  std::vector<SweepRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[static_cast<std::size_t>(i)].point = {{"p", json(0.1 * (i + 1))}};
    rows[static_cast<std::size_t>(i)].counts.residual_units = 100;
    rows[static_cast<std::size_t>(i)].counts.residual_errors = static_cast<std::uint64_t>(10 * i);
  }
  EXPECT_DOUBLE_EQ(*crossing(rows, 0.15, noise_of), 0.25);
  EXPECT_DOUBLE_EQ(*crossing(rows, 0.0, noise_of), 0.1);
  EXPECT_FALSE(crossing(rows, 0.5, noise_of));
}

TEST(Experiments, SignTest) {
  EXPECT_EQ(sign_test_z(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(sign_test_z(0, 16), 4.0);
  EXPECT_LT(sign_test_z(9, 1), 0.0);
}

TEST(Experiments, ContextualComparisonIsPaired) {
  const auto r = compare_contextual(0.3, 20000, 8);
  EXPECT_EQ(r.contextual_errors - r.contextual_only, r.baseline_errors - r.baseline_only);
  EXPECT_LT(r.contextual_errors, r.baseline_errors);
  EXPECT_GT(sign_test_z(r.contextual_only, r.baseline_only), 2.326);
}

TEST(Experiments, MapBeatsPlainDecodingOnAMarkovSource) {
  const auto r = compare_map(0.2, 20000, 3, 20000);
  EXPECT_EQ(r.map_errors - r.map_only, r.nn_errors - r.nn_only);
  EXPECT_LT(r.map_errors, r.nn_errors);
  EXPECT_THROW(compare_map(0.5, 10, 1), ConfigError);
}

TEST(Experiments, MarkovSourceTransitionFrequencies) {
  const MarkovSource source;
  auto engine = TrialRng(6).engine();
  const auto seq = source.generate(50000, engine);
  std::uint64_t follows = 0;
  for (std::size_t i = 1; i < seq.size(); ++i) follows += seq[i] == (seq[i - 1] + 1) % 8;
  EXPECT_NEAR(static_cast<double>(follows) / static_cast<double>(seq.size() - 1), 0.9, 0.01);
}

TEST(FeedbackRunConfig, AffineIdentificationAndDisturbance) {
  const FeedbackRun run = run_feedback({{"reference", 5.0},
                                        {"rounds", 20},
                                        {"error_function", {{"type", "affine"}, {"gain", 2.0}, {"offset", 2.0}}},
                                        {"disturbances", {{{"round", 8}, {"value", -1.5}}}}});
  EXPECT_TRUE(run.identified);
  EXPECT_EQ(run.probes, 2u);
  EXPECT_EQ(run.forward_boxes, 20u);
  EXPECT_EQ(run.log.size(), 20u);
  EXPECT_NEAR(run.log.back().plant, 5.0, 1e-3);
  EXPECT_GT(run.log[8].fill_bits, 0u);
  EXPECT_EQ(run.log.back().fill_bits, 0u);
}

TEST(FeedbackRunConfig, ErrorsNameTheField) {
  auto path_of = [](const json& j) {
    try {
      run_feedback(j);
    } catch (const ConfigError& e) {
      return e.path();
    }
    return std::string("<accepted>");
  };
  EXPECT_EQ(path_of({{"q", 0}}), "feedback.q");
  EXPECT_EQ(path_of({{"error_function", {{"type", "affine"}, {"gain", 0.0}}}}), "feedback.error_function.gain");
  EXPECT_EQ(path_of({{"error_function", {{"type", "cubic"}}}}), "feedback.error_function.type");
  EXPECT_EQ(path_of({{"disturbances", {{{"round", 1}}}}}), "feedback.disturbances.0.value");
  EXPECT_EQ(path_of({{"rounds", 3}}), "<accepted>");
}

TEST(Scenarios, AllPresetsSucceedAndAreDeterministic) {
  for (const auto& name : scenario_names()) {
    if (name == "contextual") continue;  // covered by the acceptance run
    const ScenarioOutput a = run_scenario(name), b = run_scenario(name);
    EXPECT_TRUE(a.ok) << name;
    EXPECT_EQ(a.files, b.files) << name;
    EXPECT_TRUE(a.files.contains(name + "_summary.json"));
  }
  EXPECT_THROW(run_scenario("nope"), ConfigError);
}

TEST(Scenarios, RamMonitorPatchesEightBits) {
  const ScenarioOutput out = run_scenario("ram-monitor");
  EXPECT_EQ(out.summary["patch"].size(), 8u);
  EXPECT_EQ(out.summary["memory_bits"], 8192);
  EXPECT_TRUE(out.summary["restored"].get<bool>());
}

TEST(Scenarios, DriverDrivenLagTrace) {
  const ScenarioOutput out = run_scenario("driver-driven");
  const auto& lags = out.summary["lags"];
  ASSERT_EQ(lags.size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(lags[i], i < 50 ? 1 : 0);
}

TEST(Scenarios, Case1MatchesGroundTruth) {
  const ScenarioOutput out = run_scenario("case1");
  EXPECT_EQ(out.summary["message"], out.summary["received"]);
  EXPECT_EQ(out.summary["layers"].size(), 3u);
}

}  // namespace
}  // namespace gecc
