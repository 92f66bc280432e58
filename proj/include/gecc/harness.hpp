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

// Deterministic Monte Carlo runner, sweeps, scenario presets and JSON
// configuration.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gecc/channel.hpp"
#include "gecc/codespace.hpp"
#include "gecc/errors.hpp"
#include "gecc/feedback.hpp"
#include "gecc/framing.hpp"
#include "gecc/rng.hpp"
#include "gecc/stack.hpp"

namespace gecc {

using json = nlohmann::json;

namespace config_detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline void allow_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError("expected an object", path);
  for (const auto& [k, _] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown field", join(path, k));
}

inline const json& require(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing required field", join(path, key));
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("expected a number", path);
  return j.get<double>();
}

inline std::uint64_t unsigned_int(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigError("expected a non-negative integer", path);
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError("expected a string", path);
  return j.get<std::string>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError("expected true or false", path);
  return j.get<bool>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) throw ConfigError("expected a number or non-empty array", path);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Re-prefix errors raised inside model constructors with the config path.
// Errors that already carry a full path pass through.
template <typename F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (e.path() == path || e.path().starts_with(path + ".")) throw;
    if (e.path().empty()) throw ConfigError(e.what(), path);
    throw ConfigError(std::string(e.what()).substr(e.path().size() + 2), join(path, e.path()));
  }
}

inline TolerancePolicy policy(const json& j, const std::string& path, TolerancePolicy fallback) {
  if (!j.contains("policy")) return fallback;
  const std::string p = string(j.at("policy"), join(path, "policy"));
  if (p == "fail-fast") return TolerancePolicy::FailFast;
  if (p == "pass-residual") return TolerancePolicy::PassResidual;
  throw ConfigError("expected fail-fast or pass-residual", join(path, "policy"));
}

inline std::optional<double> radius(const json& j, const std::string& path, std::optional<double> fallback) {
  if (!j.contains("radius")) return fallback;
  if (j.at("radius").is_null() || j.at("radius") == "unbounded") return std::nullopt;
  const double r = number(j.at("radius"), join(path, "radius"));
  if (r < 0.0) throw ConfigError("must be non-negative", join(path, "radius"));
  return r;
}

}  // namespace config_detail

// Tagged records such as {"type":"offset","b":2.0}.
inline ErrorModel parse_error_model(const json& j, const std::string& path = "error_model") {
  using namespace config_detail;
  if (!j.is_object()) throw ConfigError("expected an object", path);
  const std::string type = string(require(j, path, "type"), join(path, "type"));
  return at_path(path, [&]() -> ErrorModel {
    if (type == "none") {
      allow_keys(j, path, {"type"});
      return NoError{};
    }
    if (type == "random_flip") {
      allow_keys(j, path, {"type", "p"});
      return RandomFlip{number(require(j, path, "p"), join(path, "p"))};
    }
    if (type == "burst") {
      allow_keys(j, path, {"type", "p_start", "length"});
      return Burst{number(require(j, path, "p_start"), join(path, "p_start")),
                   static_cast<std::size_t>(unsigned_int(require(j, path, "length"), join(path, "length")))};
    }
    if (type == "gaussian") {
      allow_keys(j, path, {"type", "sigma"});
      return Gaussian{numbers(require(j, path, "sigma"), join(path, "sigma"))};
    }
    if (type == "offset") {
      allow_keys(j, path, {"type", "b"});
      return Offset{numbers(require(j, path, "b"), join(path, "b"))};
    }
    if (type == "remap") {
      allow_keys(j, path, {"type", "mapping"});
      const json& m = require(j, path, "mapping");
      if (!m.is_object()) throw ConfigError("expected an object of symbol -> symbol", join(path, "mapping"));
      std::map<int, int> mapping;
      for (const auto& [k, v] : m.items()) {
        int from = 0;
        try {
          std::size_t used = 0;
          from = std::stoi(k, &used);
          if (used != k.size()) throw std::invalid_argument(k);
        } catch (const std::exception&) {
          throw ConfigError("symbol keys must be integers", join(path, "mapping." + k));
        }
        mapping[from] = static_cast<int>(number(v, join(path, "mapping." + k)));
      }
      return at_path(join(path, "mapping"), [&]() -> ErrorModel { return Remap{Permutation(std::move(mapping))}; });
    }
    if (type == "omission") {
      allow_keys(j, path, {"type", "p_drop"});
      return Omission{number(require(j, path, "p_drop"), join(path, "p_drop"))};
    }
    if (type == "erasure") {
      allow_keys(j, path, {"type", "p_erase"});
      return Erasure{number(require(j, path, "p_erase"), join(path, "p_erase"))};
    }
    if (type == "compose") {
      allow_keys(j, path, {"type", "stages"});
      const json& st = require(j, path, "stages");
      if (!st.is_array()) throw ConfigError("expected an array", join(path, "stages"));
      std::vector<ErrorModel> stages;
      for (std::size_t i = 0; i < st.size(); ++i)
        stages.push_back(parse_error_model(st[i], join(path, "stages." + std::to_string(i))));
      return compose(std::move(stages));
    }
    throw ConfigError("unknown error model type '" + type + "'", join(path, "type"));
  });
}

inline json to_json(const ErrorModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NoError>) return {{"type", "none"}};
        if constexpr (std::is_same_v<T, RandomFlip>) return {{"type", "random_flip"}, {"p", m.p}};
        if constexpr (std::is_same_v<T, Burst>) return {{"type", "burst"}, {"p_start", m.p_start}, {"length", m.length}};
        if constexpr (std::is_same_v<T, Gaussian>) return {{"type", "gaussian"}, {"sigma", m.sigma}};
        if constexpr (std::is_same_v<T, Offset>) return {{"type", "offset"}, {"b", m.b}};
        if constexpr (std::is_same_v<T, Remap>) {
          json mapping = json::object();
          for (const auto& [from, to] : m.pi.mapping()) mapping[std::to_string(from)] = to;
          return {{"type", "remap"}, {"mapping", mapping}};
        }
        if constexpr (std::is_same_v<T, Omission>) return {{"type", "omission"}, {"p_drop", m.p_drop}};
        if constexpr (std::is_same_v<T, Erasure>) return {{"type", "erasure"}, {"p_erase", m.p_erase}};
        if constexpr (std::is_same_v<T, Compose>) {
          json stages = json::array();
          for (const auto& s : m.stages) stages.push_back(to_json(s));
          return {{"type", "compose"}, {"stages", stages}};
        }
      },
      model.variant());
}

inline std::shared_ptr<const PhysicalLayer> parse_physical_layer(const json& j, const std::string& path) {
  using namespace config_detail;
  const std::string type = string(require(j, path, "type"), join(path, "type"));
  return at_path(path, [&]() -> std::shared_ptr<const PhysicalLayer> {
    if (type == "hamming74") {
      allow_keys(j, path, {"type", "radius", "policy"});
      return hamming74_layer(policy(j, path, TolerancePolicy::PassResidual), radius(j, path, 1.0));
    }
    if (type == "repetition" || type == "raw") {
      allow_keys(j, path, {"type", "k", "policy"});
      const std::uint64_t k = type == "raw" ? 1 : unsigned_int(require(j, path, "k"), join(path, "k"));
      return repetition_layer(k, policy(j, path, TolerancePolicy::PassResidual));
    }
    if (type == "codebook") {
      allow_keys(j, path, {"type", "table", "path", "bits", "radius", "policy", "name"});
      std::string table;
      if (j.contains("table")) {
        table = string(j.at("table"), join(path, "table"));
      } else {
        const std::string file = string(require(j, path, "path"), join(path, "path"));
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot read codebook file '" + file + "'", join(path, "path"));
        table.assign(std::istreambuf_iterator<char>(in), {});
      }
      Codebook book = j.contains("radius") ? parse_codebook(table, radius(j, path, std::nullopt)) : parse_codebook(table);
      const auto bits = static_cast<unsigned>(unsigned_int(require(j, path, "bits"), join(path, "bits")));
      const std::string name = j.contains("name") ? string(j.at("name"), join(path, "name")) : "codebook";
      return std::make_shared<CodebookLayer>(name, std::move(book), bits, policy(j, path, TolerancePolicy::PassResidual));
    }
    throw ConfigError("unknown physical layer type '" + type + "'", join(path, "type"));
  });
}

inline std::shared_ptr<const Layer> parse_layer(const json& j, const std::string& path) {
  using namespace config_detail;
  const std::string type = string(require(j, path, "type"), join(path, "type"));
  if (type == "semantic") {
    allow_keys(j, path, {"type", "correct", "policy"});
    const bool correct = j.contains("correct") ? boolean(j.at("correct"), join(path, "correct")) : true;
    return std::make_shared<SemanticLayer>(correct, policy(j, path, TolerancePolicy::PassResidual));
  }
  if (type == "tags") {
    allow_keys(j, path, {"type", "repair", "max_edits", "policy"});
    const bool repair = j.contains("repair") ? boolean(j.at("repair"), join(path, "repair")) : true;
    const auto max_edits =
        j.contains("max_edits") ? static_cast<int>(unsigned_int(j.at("max_edits"), join(path, "max_edits"))) : 8;
    return std::make_shared<TagLayer>(repair, max_edits, policy(j, path, TolerancePolicy::PassResidual));
  }
  if (type == "checksum") {
    allow_keys(j, path, {"type", "policy"});
    return std::make_shared<ChecksumLayer>(policy(j, path, TolerancePolicy::FailFast));
  }
  throw ConfigError("unknown layer type '" + type + "'", join(path, "type"));
}

// {"profile": "balanced" | "case1" | "bottom-heavy" | "top-heavy"} or
// {"layers": [top, ..., physical]}.
inline Stack parse_stack(const json& j, const std::string& path = "stack") {
  using namespace config_detail;
  allow_keys(j, path, {"profile", "layers"});
  if (j.contains("profile")) {
    if (j.contains("layers")) throw ConfigError("give either profile or layers", path);
    const std::string p = string(j.at("profile"), join(path, "profile"));
    if (p == "balanced" || p == "case1") return make_stack(AllocationProfile::Balanced);
    if (p == "bottom-heavy") return make_stack(AllocationProfile::BottomHeavy);
    if (p == "top-heavy") return make_stack(AllocationProfile::TopHeavy);
    throw ConfigError("unknown profile '" + p + "'", join(path, "profile"));
  }
  const json& layers = require(j, path, "layers");
  if (!layers.is_array() || layers.empty()) throw ConfigError("expected a non-empty array", join(path, "layers"));
  Stack s;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i)
    s.layers.push_back(parse_layer(layers[i], join(path, "layers." + std::to_string(i))));
  s.bottom = parse_physical_layer(layers.back(), join(path, "layers." + std::to_string(layers.size() - 1)));
  return s;
}

struct MessageSpec {
  enum class Kind { RandomBytes, RandomBits, Fixed };
  Kind kind = Kind::RandomBytes;
  std::size_t length = 1;
  std::string value;
};

inline MessageSpec parse_message(const json& j, const std::string& path = "message") {
  using namespace config_detail;
  allow_keys(j, path, {"type", "length", "value"});
  const std::string type = string(require(j, path, "type"), join(path, "type"));
  MessageSpec m;
  if (type == "fixed") {
    m.kind = MessageSpec::Kind::Fixed;
    m.value = string(require(j, path, "value"), join(path, "value"));
    return m;
  }
  if (type != "random-bytes" && type != "random-bits") throw ConfigError("unknown message type '" + type + "'", join(path, "type"));
  m.kind = type == "random-bytes" ? MessageSpec::Kind::RandomBytes : MessageSpec::Kind::RandomBits;
  m.length = static_cast<std::size_t>(unsigned_int(require(j, path, "length"), join(path, "length")));
  if (m.length == 0) throw ConfigError("must be positive", join(path, "length"));
  return m;
}

inline json to_json(const MessageSpec& m) {
  switch (m.kind) {
    case MessageSpec::Kind::Fixed: return {{"type", "fixed"}, {"value", m.value}};
    case MessageSpec::Kind::RandomBits: return {{"type", "random-bits"}, {"length", m.length}};
    case MessageSpec::Kind::RandomBytes: break;
  }
  return {{"type", "random-bytes"}, {"length", m.length}};
}

// Stream index reserved for message generation; composed error models use
// the small indices.
inline constexpr std::uint64_t kMessageStream = 0x6d657373616765ULL;

inline std::string make_message(const MessageSpec& m, const TrialRng& rng) {
  if (m.kind == MessageSpec::Kind::Fixed) return m.value;
  auto engine = rng.substream(kMessageStream).engine();
  std::string out;
  for (std::size_t i = 0; i < m.length; ++i) {
    const auto v = engine();
    out.push_back(m.kind == MessageSpec::Kind::RandomBits ? static_cast<char>('0' + (v & 1u))
                                                          : static_cast<char>(v & 0xFFu));
  }
  return out;
}

struct SweepAxis {
  std::string parameter;  // dotted path into the config, e.g. "error_model.p"
  std::vector<json> values;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::uint64_t trials = 1;
  unsigned workers = 1;
  json stack = {{"layers", json::array({{{"type", "hamming74"}}})}};
  json error_model = {{"type", "none"}};
  MessageSpec message;
  std::vector<SweepAxis> sweep;
  json feedback;  // feedback-run settings, optional
  std::string out = ".";
  std::string format = "csv";
};

inline ScenarioConfig parse_config(const json& j) {
  using namespace config_detail;
  allow_keys(j, "", {"seed", "trials", "workers", "stack", "error_model", "message", "sweep", "feedback", "out", "format"});
  ScenarioConfig c;
  if (j.contains("seed")) c.seed = unsigned_int(j.at("seed"), "seed");
  if (j.contains("trials")) c.trials = unsigned_int(j.at("trials"), "trials");
  if (c.trials == 0) throw ConfigError("must be positive", "trials");
  if (j.contains("workers")) c.workers = static_cast<unsigned>(unsigned_int(j.at("workers"), "workers"));
  if (c.workers == 0) throw ConfigError("must be positive", "workers");
  if (j.contains("stack")) c.stack = j.at("stack");
  if (j.contains("error_model")) c.error_model = j.at("error_model");
  if (j.contains("message")) c.message = parse_message(j.at("message"));
  if (j.contains("feedback")) c.feedback = j.at("feedback");
  if (j.contains("out")) c.out = string(j.at("out"), "out");
  if (j.contains("format")) c.format = string(j.at("format"), "format");
  if (c.format != "csv" && c.format != "json") throw ConfigError("expected csv or json", "format");
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    auto axis = [&](const std::string& name, const json& values, const std::string& path) {
      if (!values.is_array() || values.empty()) throw ConfigError("expected a non-empty array of values", path);
      c.sweep.push_back({name, std::vector<json>(values.begin(), values.end())});
    };
    if (s.is_object()) {
      for (const auto& [k, v] : s.items()) axis(k, v, "sweep." + k);
    } else if (s.is_array()) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string p = "sweep." + std::to_string(i);
        allow_keys(s[i], p, {"parameter", "values"});
        axis(string(require(s[i], p, "parameter"), p + ".parameter"), require(s[i], p, "values"), p + ".values");
      }
    } else {
      throw ConfigError("expected an object or array", "sweep");
    }
  }
  // validate the nested specs now so errors carry their paths
  parse_stack(c.stack);
  parse_error_model(c.error_model);
  return c;
}

inline json to_json(const ScenarioConfig& c) {
  json j = {{"seed", c.seed},       {"trials", c.trials},           {"workers", c.workers},
            {"stack", c.stack},     {"error_model", c.error_model}, {"message", to_json(c.message)},
            {"out", c.out},         {"format", c.format}};
  if (!c.sweep.empty()) {
    json s = json::array();
    for (const auto& a : c.sweep) s.push_back({{"parameter", a.parameter}, {"values", a.values}});
    j["sweep"] = s;
  }
  if (!c.feedback.is_null()) j["feedback"] = c.feedback;
  return j;
}

inline ScenarioConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file '" + file + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), file);
  }
  return parse_config(j);
}

// Aggregated over trials. All fields are sums, so any grouping of trial
// batches folds to the same totals.
struct TrialCounts {
  std::uint64_t trials = 0;
  std::uint64_t aborted = 0;
  std::uint64_t raw_errors = 0;       // physical positions wrong before decoding
  std::uint64_t raw_units = 0;
  std::uint64_t raw_symbol_errors = 0;  // physical codewords with any wrong position
  std::uint64_t raw_symbols = 0;
  std::uint64_t residual_errors = 0;  // top-level symbols wrong or undelivered
  std::uint64_t residual_units = 0;
  std::uint64_t gross_bits = 0;
  double net_bits = 0.0;
  double delivered_bits = 0.0;  // net bits of correctly delivered symbols
  ResidualReport layers;

  TrialCounts& operator+=(const TrialCounts& o) {
    trials += o.trials;
    aborted += o.aborted;
    raw_errors += o.raw_errors;
    raw_units += o.raw_units;
    raw_symbol_errors += o.raw_symbol_errors;
    raw_symbols += o.raw_symbols;
    residual_errors += o.residual_errors;
    residual_units += o.residual_units;
    gross_bits += o.gross_bits;
    net_bits += o.net_bits;
    delivered_bits += o.delivered_bits;
    layers += o.layers;
    return *this;
  }
  bool operator==(const TrialCounts&) const = default;
};

inline TrialCounts run_trial(const Stack& stack, const ErrorModel& model, const MessageSpec& spec, std::uint64_t seed,
                             std::uint64_t trial) {
  const TrialRng rng(seed, trial);
  const std::string message = make_message(spec, rng);
  const LayerBase& top = stack.top();
  const std::vector<std::string> sent = top.upper_units(message);
  TrialCounts c;
  c.trials = 1;
  c.residual_units = sent.size();
  c.net_bits = static_cast<double>(sent.size()) * top.upper_unit_bits();

  // the raw rate is a property of the channel alone
  std::string lower = message;
  for (const auto& layer : stack.layers) lower = layer->encode(lower);
  const SignalFrame frame = stack.bottom->encode(lower);
  c.gross_bits = stack.bottom->gross_bits(frame);
  const SignalFrame rx = apply(model, frame, rng);
  const auto ref_units = stack.bottom->units(frame);
  const auto rx_units = stack.bottom->units(rx);
  c.raw_units = ref_units.size();
  for (std::size_t i = 0; i < ref_units.size(); ++i) c.raw_errors += i >= rx_units.size() || rx_units[i] != ref_units[i];
  c.raw_symbols = frame.length();
  for (std::size_t i = 0; i < frame.length(); ++i)
    c.raw_symbol_errors += i >= rx.length() || !(rx.vectors[i] == frame.vectors[i]);

  try {
    Transmission t = transmit(stack, message, model, rng);
    const auto got = top.upper_units(t.received);
    std::uint64_t wrong = 0;
    for (std::size_t i = 0; i < sent.size(); ++i) wrong += i >= got.size() || got[i] != sent[i];
    c.residual_errors = wrong;
    c.delivered_bits = static_cast<double>(sent.size() - wrong) * top.upper_unit_bits();
    c.layers = std::move(t.report);
  } catch (const TransmissionAborted&) {
    c.aborted = 1;
    c.residual_errors = sent.size();
  }
  return c;
}

// Binomial half-width at 99% confidence (normal approximation).
inline double half_width_99(std::uint64_t errors, std::uint64_t n) {
  if (n == 0) return 0.0;
  constexpr double z = 2.5758293035489004;
  const double p = static_cast<double>(errors) / static_cast<double>(n);
  return z * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

struct SweepRow {
  std::vector<std::pair<std::string, json>> point;
  TrialCounts counts;

  double raw_rate() const {
    return counts.raw_units ? static_cast<double>(counts.raw_errors) / static_cast<double>(counts.raw_units) : 0.0;
  }
  double raw_symbol_rate() const {
    return counts.raw_symbols ? static_cast<double>(counts.raw_symbol_errors) / static_cast<double>(counts.raw_symbols)
                              : 0.0;
  }
  double residual_rate() const {
    return counts.residual_units ? static_cast<double>(counts.residual_errors) / static_cast<double>(counts.residual_units)
                                 : 0.0;
  }
  double overhead_ratio() const { return counts.net_bits > 0 ? static_cast<double>(counts.gross_bits) / counts.net_bits : 0.0; }
  double net_information_per_use() const {
    return counts.gross_bits ? counts.delivered_bits / static_cast<double>(counts.gross_bits) : 0.0;
  }
  double half_width() const { return half_width_99(counts.residual_errors, counts.residual_units); }
};

// `trials` transmissions, trial i seeded by (seed, i) alone. Workers take
// interleaved trial indices; integer sums make the total independent of
// the split.
inline SweepRow run_monte_carlo(const ScenarioConfig& config) {
  if (config.trials == 0) throw ConfigError("must be positive", "trials");
  const Stack stack = parse_stack(config.stack);
  const ErrorModel model = parse_error_model(config.error_model);
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(config.workers, config.trials));
  std::vector<TrialCounts> partial(workers);
  std::vector<std::exception_ptr> failures(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::uint64_t t = w; t < config.trials; t += workers)
        partial[w] += run_trial(stack, model, config.message, config.seed, t);
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  SweepRow row;
  for (const auto& p : partial) row.counts += p;
  return row;
}

namespace config_detail {

inline json::json_pointer pointer_for(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string seg;
  while (std::getline(ss, seg, '.')) p += "/" + seg;
  return json::json_pointer(p);
}

}  // namespace config_detail

// One run_monte_carlo row per grid point (Cartesian product, first axis
// outermost), in grid order.
inline std::vector<SweepRow> sweep(const ScenarioConfig& config, const std::vector<SweepAxis>& grid) {
  if (grid.empty()) throw ConfigError("sweep grid is empty", "sweep");
  for (const auto& a : grid)
    if (a.values.empty()) throw ConfigError("no values", "sweep." + a.parameter);
  std::vector<SweepRow> rows;
  std::vector<std::size_t> idx(grid.size(), 0);
  const json base = to_json(config);
  while (true) {
    json doc = base;
    doc.erase("sweep");
    SweepRow row;
    for (std::size_t a = 0; a < grid.size(); ++a) {
      try {
        doc[config_detail::pointer_for(grid[a].parameter)] = grid[a].values[idx[a]];
      } catch (const json::exception&) {
        throw ConfigError("not a settable config path", "sweep." + grid[a].parameter);
      }
      row.point.emplace_back(grid[a].parameter, grid[a].values[idx[a]]);
    }
    ScenarioConfig c = parse_config(doc);
    row.counts = run_monte_carlo(c).counts;
    rows.push_back(std::move(row));
    std::size_t a = grid.size();
    while (a > 0) {
      --a;
      if (++idx[a] < grid[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return rows;
    }
  }
}

inline std::vector<SweepRow> sweep(const ScenarioConfig& config) { return sweep(config, config.sweep); }

namespace report_detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace report_detail

inline std::string to_csv(const std::vector<SweepRow>& rows) {
  using report_detail::fmt;
  std::string out;
  if (!rows.empty())
    for (const auto& [name, _] : rows.front().point) out += name + ",";
  out += "trials,aborted,raw_errors,raw_units,raw_rate,raw_symbol_errors,raw_symbols,raw_symbol_rate,residual_errors,residual_units,residual_rate,half_width_99,"
         "overhead_ratio,net_information_per_use\n";
  for (const auto& r : rows) {
    for (const auto& [_, v] : r.point) out += v.dump() + ",";
    const auto& c = r.counts;
    out += std::to_string(c.trials) + ',' + std::to_string(c.aborted) + ',' + std::to_string(c.raw_errors) + ',' +
           std::to_string(c.raw_units) + ',' + fmt(r.raw_rate()) + ',' + std::to_string(c.raw_symbol_errors) + ',' +
           std::to_string(c.raw_symbols) + ',' + fmt(r.raw_symbol_rate()) + ',' + std::to_string(c.residual_errors) + ',' +
           std::to_string(c.residual_units) + ',' + fmt(r.residual_rate()) + ',' + fmt(r.half_width()) + ',' +
           fmt(r.overhead_ratio()) + ',' + fmt(r.net_information_per_use()) + '\n';
  }
  return out;
}

inline json to_json(const ResidualReport& r) {
  json layers = json::array();
  for (const auto& l : r.layers)
    layers.push_back({{"layer", l.layer},
                      {"errors_in", l.errors_in},
                      {"corrected", l.corrected},
                      {"introduced", l.introduced},
                      {"errors_out", l.errors_out}});
  return layers;
}

inline json to_json(const SweepRow& r) {
  json point = json::object();
  for (const auto& [k, v] : r.point) point[k] = v;
  const auto& c = r.counts;
  return {{"point", point},
          {"trials", c.trials},
          {"aborted", c.aborted},
          {"raw_errors", c.raw_errors},
          {"raw_units", c.raw_units},
          {"raw_rate", r.raw_rate()},
          {"raw_symbol_errors", c.raw_symbol_errors},
          {"raw_symbols", c.raw_symbols},
          {"raw_symbol_rate", r.raw_symbol_rate()},
          {"residual_errors", c.residual_errors},
          {"residual_units", c.residual_units},
          {"residual_rate", r.residual_rate()},
          {"half_width_99", r.half_width()},
          {"overhead_ratio", r.overhead_ratio()},
          {"net_information_per_use", r.net_information_per_use()},
          {"layers", to_json(c.layers)}};
}

// Noise level where the residual rate first reaches `level`, linearly
// interpolated between neighboring grid points. Rows must be in ascending
// noise order; `noise` reads a row's noise value.
template <typename NoiseOf>
std::optional<double> crossing(const std::vector<SweepRow>& rows, double level, NoiseOf noise) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].residual_rate() < level) continue;
    if (i == 0) return noise(rows[0]);
    const double x0 = noise(rows[i - 1]), x1 = noise(rows[i]);
    const double y0 = rows[i - 1].residual_rate(), y1 = rows[i].residual_rate();
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
  }
  return std::nullopt;
}

// Paired comparison of the contextual octagon code against plain 8-way
// nearest-neighbor decoding of the same noisy points.
struct ContextualComparison {
  double sigma = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t contextual_errors = 0;
  std::uint64_t baseline_errors = 0;
  std::uint64_t contextual_only = 0;  // discordant pairs
  std::uint64_t baseline_only = 0;
};

inline ContextualComparison compare_contextual(double sigma, std::uint64_t trials, std::uint64_t seed) {
  const ContextualCodebook book;
  const ErrorModel noise = Gaussian{{sigma}};
  ContextualComparison r{sigma, trials};
  for (std::uint64_t t = 0; t < trials; ++t) {
    const TrialRng rng(seed, t);
    auto pick = rng.substream(kMessageStream).engine();
    const int context = static_cast<int>(pick() % 8);
    const int bit = static_cast<int>(pick() & 1u);
    const int sent = ContextualCodebook::follower(context, bit);
    const SignalFrame rx = apply(noise, SignalFrame{{book.encode(sent)}}, rng);
    const ContextualDecode c = contextual_decode(book, context, rx.vectors.front());
    const bool c_wrong = !c.bit || *c.bit != bit;
    const bool b_wrong = decoded_symbol(nn_decode(book.base(), rx.vectors.front())) != std::optional<int>(sent);
    r.contextual_errors += c_wrong;
    r.baseline_errors += b_wrong;
    r.contextual_only += c_wrong && !b_wrong;
    r.baseline_only += b_wrong && !c_wrong;
  }
  return r;
}

// One-sided sign-test statistic on discordant pairs: positive when the
// first decoder wins.
inline double sign_test_z(std::uint64_t first_only, std::uint64_t second_only) {
  const double n = static_cast<double>(first_only + second_only);
  if (n == 0.0) return 0.0;
  return (static_cast<double>(second_only) - static_cast<double>(first_only)) / std::sqrt(n);
}

// A first-order Markov source over eight 3-bit symbols: from s the next
// symbol is s+1 with probability `follow`, any other symbol uniformly.
struct MarkovSource {
  double follow = 0.9;

  static const std::vector<std::string>& alphabet() {
    static const std::vector<std::string> a{"s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"};
    return a;
  }
  static const std::map<std::string, std::string>& encoding() {
    static const std::map<std::string, std::string> e{{"s0", "000"}, {"s1", "001"}, {"s2", "010"}, {"s3", "011"},
                                                      {"s4", "100"}, {"s5", "101"}, {"s6", "110"}, {"s7", "111"}};
    return e;
  }
  double probability(int from, int to) const { return to == (from + 1) % 8 ? follow : (1.0 - follow) / 7.0; }

  std::vector<int> generate(std::size_t n, TrialRng::Engine& engine) const {
    std::vector<int> out;
    int s = static_cast<int>(engine() % 8);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(s);
      double u = uniform01(engine);
      int next = 7;
      for (int t = 0; t < 8; ++t) {
        u -= probability(s, t);
        if (u < 0.0) {
          next = t;
          break;
        }
      }
      s = next;
    }
    return out;
  }
};

struct MapComparison {
  double p = 0.0;
  std::uint64_t symbols = 0;
  std::uint64_t map_errors = 0;
  std::uint64_t nn_errors = 0;
  std::uint64_t map_only = 0;
  std::uint64_t nn_only = 0;
};

// Symbols of a Markov source sent bit by bit over a binary symmetric
// channel. Plain decoding takes each bit as received; MAP decoding biases
// each bit with cascade priors from a pool trained on the source. The
// context is a filtered belief over the previous symbol, not the previous
// decision, so one wrong decision does not lock the decoder onto a wrong
// chain.
inline MapComparison compare_map(double p, std::uint64_t symbols, std::uint64_t seed, std::uint64_t training = 100000) {
  if (!(p > 0.0 && p < 0.5)) throw ConfigError("crossover must be in (0, 0.5)", "p");
  const MarkovSource source;
  const auto& alphabet = MarkovSource::alphabet();
  const auto& encoding = MarkovSource::encoding();
  ContextPool pool(alphabet);
  {
    auto engine = TrialRng(seed, 0).substream(1).engine();
    for (int s : source.generate(training, engine)) pool.observe(alphabet[static_cast<std::size_t>(s)]);
  }
  auto engine = TrialRng(seed, 1).substream(1).engine();
  const std::vector<int> sent = source.generate(symbols, engine);
  std::string bits;
  for (int s : sent) bits += encoding.at(alphabet[static_cast<std::size_t>(s)]);
  const SignalFrame rx = apply(RandomFlip{p}, SignalFrame::from_bits(bits), TrialRng(seed, 2));

  const Codebook bit_book({{0, {0.0}}, {1, {1.0}}});
  const double lambda = 1.0 / std::log((1.0 - p) / p);
  const std::size_t n = alphabet.size();
  std::vector<std::vector<double>> transition(n);
  for (std::size_t s = 0; s < n; ++s) transition[s] = pool.priors(s);
  std::vector<double> belief = pool.priors(std::nullopt);  // over the previous symbol
  bool first = true;
  MapComparison r{p, symbols};
  for (std::size_t i = 0; i < sent.size(); ++i) {
    std::vector<double> prior(n, 0.0);
    if (first) {
      prior = belief;
    } else {
      for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t) prior[t] += belief[s] * transition[s][t];
    }
    first = false;
    std::string plain, biased, heard;
    for (std::size_t k = 0; k < 3; ++k) {
      const SignalVector& v = rx.vectors[3 * i + k];
      const char hard = static_cast<char>('0' + *decoded_symbol(nn_decode(bit_book, v)));
      plain += hard;
      heard += hard;
      const auto pri = cascade_priors(prior, alphabet, encoding, biased);
      const auto b = decoded_symbol(map_decode(bit_book, v, pri, lambda));
      biased += b ? static_cast<char>('0' + *b) : hard;
    }
    const std::string& truth = encoding.at(alphabet[static_cast<std::size_t>(sent[i])]);
    const bool nn_wrong = plain != truth, map_wrong = biased != truth;
    r.nn_errors += nn_wrong;
    r.map_errors += map_wrong;
    r.nn_only += nn_wrong && !map_wrong;
    r.map_only += map_wrong && !nn_wrong;
    // belief update with the likelihood of the received bits
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::string& code = encoding.at(alphabet[t]);
      double like = 1.0;
      for (std::size_t k = 0; k < 3; ++k) like *= code[k] == heard[k] ? 1.0 - p : p;
      belief[t] = prior[t] * like;
      total += belief[t];
    }
    for (double& b : belief) b /= total;
  }
  return r;
}

struct FeedbackRun {
  std::vector<RoundLog> log;
  std::size_t probes = 0;
  bool identified = false;
  std::string inverse;
  std::size_t forward_payload_bits = 0;
  std::size_t forward_boxes = 0;
};

// "feedback": {"reference", "initial_plant", "q", "delay", "gain",
// "capacity", "rounds", "error_function": {"type": "affine"|"identity",
// "gain", "offset"}, "identify": bool, "disturbances": [{"round", "value"}]}
inline FeedbackRun run_feedback(const json& j, const std::string& path = "feedback") {
  using namespace config_detail;
  allow_keys(j, path,
             {"reference", "initial_plant", "q", "delay", "gain", "capacity", "rounds", "error_function", "identify",
              "disturbances"});
  SessionConfig sc;
  if (j.contains("reference")) sc.reference = number(j.at("reference"), join(path, "reference"));
  if (j.contains("initial_plant")) sc.initial_plant = number(j.at("initial_plant"), join(path, "initial_plant"));
  if (j.contains("q")) sc.q = number(j.at("q"), join(path, "q"));
  if (j.contains("delay")) sc.delay = static_cast<std::size_t>(unsigned_int(j.at("delay"), join(path, "delay")));
  if (j.contains("gain")) sc.gain = number(j.at("gain"), join(path, "gain"));
  if (j.contains("capacity")) sc.box_capacity = static_cast<unsigned>(unsigned_int(j.at("capacity"), join(path, "capacity")));
  const std::uint64_t rounds = j.contains("rounds") ? unsigned_int(j.at("rounds"), join(path, "rounds")) : 30;

  ErrorFunction e = IdentityMap{};
  if (j.contains("error_function")) {
    const std::string p = join(path, "error_function");
    const json& ef = j.at("error_function");
    allow_keys(ef, p, {"type", "gain", "offset"});
    const std::string type = string(require(ef, p, "type"), join(p, "type"));
    if (type == "affine") {
      const double a = ef.contains("gain") ? number(ef.at("gain"), join(p, "gain")) : 1.0;
      const double b = ef.contains("offset") ? number(ef.at("offset"), join(p, "offset")) : 0.0;
      e = at_path(p, [&] { return ErrorFunction(AffineMap{a, b}); });
    } else if (type != "identity") {
      throw ConfigError("expected affine or identity", join(p, "type"));
    }
  }
  std::map<std::uint64_t, double> disturbances;
  if (j.contains("disturbances")) {
    const json& ds = j.at("disturbances");
    if (!ds.is_array()) throw ConfigError("expected an array", join(path, "disturbances"));
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const std::string p = join(path, "disturbances." + std::to_string(i));
      allow_keys(ds[i], p, {"round", "value"});
      disturbances[unsigned_int(require(ds[i], p, "round"), join(p, "round"))] +=
          number(require(ds[i], p, "value"), join(p, "value"));
    }
  }
  Session session = at_path(path, [&] { return Session(sc, e); });
  FeedbackRun run;
  const bool identify = j.contains("identify") ? boolean(j.at("identify"), join(path, "identify")) : true;
  if (identify) session.set_inverse(identify_error_model(session, ErrorFamily::Affine));
  run.identified = session.inverse().identified;
  run.inverse = describe(session.inverse().function);
  run.probes = session.probes();
  for (std::uint64_t t = 0; t < rounds; ++t) {
    const auto it = disturbances.find(t);
    session.advance(it == disturbances.end() ? std::nullopt : std::optional<double>(it->second));
  }
  run.log = session.log();
  run.forward_boxes = session.forward_boxes().size();
  for (const auto& b : session.forward_boxes()) run.forward_payload_bits += b.fill();
  return run;
}

// Named presets and the files they produce (name -> content).
struct ScenarioOutput {
  std::string name;
  std::map<std::string, std::string> files;
  json summary;
  bool ok = true;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"case1", "driver-driven", "ram-monitor", "contextual", "feedback-affine"};
  return names;
}

// Default seeds: case1 7, ram-monitor 1024, contextual 25.
inline ScenarioOutput run_scenario(const std::string& name, std::optional<std::uint64_t> seed = std::nullopt) {
  ScenarioOutput out;
  out.name = name;
  if (name == "case1") {
    auto [stack, run] = scenario_case1(seed.value_or(7));
    out.ok = run.received == run.message;
    out.files["case1_report.csv"] = to_csv(run.report);
    out.summary = {{"scenario", name},
                   {"seed", run.seed},
                   {"profile", std::string(to_string(stack.profile))},
                   {"message", run.message},
                   {"received", run.received},
                   {"match", out.ok},
                   {"layers", to_json(run.report)}};
  } else if (name == "driver-driven") {
    const auto trace = run_adapter_scenario(Permutation::cyclic_shift(4, 1), 100, 50);
    out.files["driver_driven_rounds.csv"] = to_csv(trace);
    json lags = json::array();
    for (const auto& r : trace) lags.push_back(r.lag);
    out.ok = std::all_of(trace.begin(), trace.end(), [](const auto& r) { return r.lag == (r.round <= 50 ? 1 : 0); });
    out.summary = {{"scenario", name}, {"remap", "cyclic shift by 1"}, {"install_at", 50}, {"lags", lags}};
  } else if (name == "ram-monitor") {
    const std::uint64_t s = seed.value_or(1024);
    auto engine = TrialRng(s).engine();
    std::vector<bool> backup(8 * 1024);
    for (std::size_t i = 0; i < backup.size(); ++i) backup[i] = engine() & 1u;
    std::vector<bool> memory = backup;
    std::set<std::size_t> flipped;
    while (flipped.size() < 8) flipped.insert(static_cast<std::size_t>(engine() % memory.size()));
    for (std::size_t i : flipped) memory[i] = !memory[i];
    const RamPatch patch = ram_monitor(memory, backup);
    apply_patch(memory, patch);
    out.ok = memory == backup && patch.positions.size() == 8;
    std::string csv = "position\n";
    for (std::size_t p : patch.positions) csv += std::to_string(p) + "\n";
    out.files["ram_monitor_patch.csv"] = csv;
    out.summary = {{"scenario", name},           {"seed", s},
                   {"memory_bits", backup.size()}, {"flipped", flipped.size()},
                   {"patch", patch.positions},   {"patch_bits", patch.patch_bits},
                   {"address_bits", patch.address_bits}, {"restored", memory == backup}};
  } else if (name == "contextual") {
    const std::uint64_t s = seed.value_or(25);
    std::string csv = "sigma,trials,contextual_errors,baseline_errors,contextual_only,baseline_only\n";
    json rows = json::array();
    for (double sigma : {0.05, 0.1, 0.2}) {
      const auto r = compare_contextual(sigma, 100000, s);
      out.ok = out.ok && r.contextual_errors <= r.baseline_errors;
      csv += report_detail::fmt(sigma) + ',' + std::to_string(r.trials) + ',' + std::to_string(r.contextual_errors) +
             ',' + std::to_string(r.baseline_errors) + ',' + std::to_string(r.contextual_only) + ',' +
             std::to_string(r.baseline_only) + '\n';
      rows.push_back({{"sigma", sigma}, {"contextual_errors", r.contextual_errors}, {"baseline_errors", r.baseline_errors}});
    }
    out.files["contextual.csv"] = csv;
    out.summary = {{"scenario", name}, {"seed", s}, {"rows", rows}};
  } else if (name == "feedback-affine") {
    const json cfg = {{"reference", 5.0},
                      {"q", 1e-3},
                      {"delay", 0},
                      {"rounds", 30},
                      {"error_function", {{"type", "affine"}, {"gain", 1.0}, {"offset", 2.0}}},
                      {"identify", true},
                      {"disturbances", json::array({{{"round", 10}, {"value", 3.0}}})}};
    const FeedbackRun run = run_feedback(cfg);
    out.ok = run.identified && std::abs(run.log.back().plant - 5.0) <= 5e-4;
    out.files["feedback_affine_rounds.csv"] = to_csv(run.log);
    out.summary = {{"scenario", name},
                   {"inverse", run.inverse},
                   {"probes", run.probes},
                   {"forward_boxes", run.forward_boxes},
                   {"forward_payload_bits", run.forward_payload_bits},
                   {"final_plant", run.log.back().plant}};
  } else {
    throw ConfigError("unknown scenario '" + name + "'", "scenario");
  }
  out.summary["ok"] = out.ok;
  out.files[std::string(name) + "_summary.json"] = out.summary.dump(2) + "\n";
  return out;
}

}  // namespace gecc
