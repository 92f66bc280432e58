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

// The feedback channel: virtual message boxes, the delta function,
// information modulation, and sender-side identification and inversion of
// the receiver's error function.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gecc/channel.hpp"
#include "gecc/errors.hpp"
#include "gecc/stack.hpp"

namespace gecc {

// A fixed-capacity slot that crosses the link every round. An empty box
// (fill 0) still travels but carries nothing.
struct VirtualBox {
  unsigned capacity = 65;
  std::vector<bool> payload;

  unsigned fill() const noexcept { return static_cast<unsigned>(payload.size()); }
  bool empty() const noexcept { return payload.empty(); }

  std::string bits() const {
    std::string s;
    for (bool b : payload) s += b ? '1' : '0';
    return s;
  }
};

inline double delta(double reference, double feedback) { return reference - feedback; }

// Sign bit followed by the minimal-length binary magnitude of
// round(|d| / q). Values that round to zero give an empty box.
inline VirtualBox modulate(double d, double q, unsigned capacity = 65) {
  if (!(q > 0.0)) throw ConfigError("quantization step must be positive", "q");
  if (!std::isfinite(d)) throw ConfigError("correction must be finite", "delta");
  const long double scaled = std::fabs(static_cast<long double>(d)) / q;
  if (std::roundl(scaled) > 18446744073709551615.0L) throw ConfigError("|delta|/q overflows the 64-bit magnitude field", "delta");
  const auto magnitude = static_cast<std::uint64_t>(std::roundl(scaled));
  VirtualBox box{capacity, {}};
  if (magnitude == 0) return box;
  box.payload.push_back(d < 0.0);
  int top = 63;
  while (!((magnitude >> top) & 1u)) --top;
  for (int i = top; i >= 0; --i) box.payload.push_back((magnitude >> i) & 1u);
  if (box.fill() > capacity) throw ConfigError("correction needs " + std::to_string(box.fill()) + " bits, box holds " +
                                               std::to_string(capacity), "capacity");
  return box;
}

inline double demodulate(const VirtualBox& box, double q) {
  if (box.empty()) return 0.0;
  std::uint64_t magnitude = 0;
  for (std::size_t i = 1; i < box.payload.size(); ++i) magnitude = (magnitude << 1) | (box.payload[i] ? 1u : 0u);
  const double v = static_cast<double>(magnitude) * q;
  return box.payload.front() ? -v : v;
}

struct IdentityMap {
  bool operator==(const IdentityMap&) const = default;
};
struct AffineMap {
  double gain = 1.0;
  double offset = 0.0;
  bool operator==(const AffineMap&) const = default;
};
struct SymbolMap {
  Permutation pi;
  bool operator==(const SymbolMap&) const = default;
};

// The receiver's systematic distortion e of whatever it receives.
class ErrorFunction {
 public:
  using Variant = std::variant<IdentityMap, AffineMap, SymbolMap>;

  ErrorFunction() = default;
  ErrorFunction(IdentityMap m) : fn_(m) {}  // NOLINT(google-explicit-constructor)
  ErrorFunction(AffineMap m) : fn_(m) {     // NOLINT(google-explicit-constructor)
    if (m.gain == 0.0 || !std::isfinite(m.gain) || !std::isfinite(m.offset))
      throw ConfigError("affine gain must be finite and nonzero", "gain");
  }
  ErrorFunction(SymbolMap m) : fn_(std::move(m)) {}  // NOLINT(google-explicit-constructor)

  const Variant& variant() const noexcept { return fn_; }

  double operator()(double x) const {
    if (const auto* a = std::get_if<AffineMap>(&fn_)) return a->gain * x + a->offset;
    if (const auto* s = std::get_if<SymbolMap>(&fn_)) {
      if (x != std::round(x)) throw ConfigError("symbol map applied to a non-symbol value");
      return s->pi(static_cast<int>(x));
    }
    return x;
  }

  ErrorFunction inverse() const {
    if (const auto* a = std::get_if<AffineMap>(&fn_)) return AffineMap{1.0 / a->gain, -a->offset / a->gain};
    if (const auto* s = std::get_if<SymbolMap>(&fn_)) return SymbolMap{s->pi.inverse()};
    return IdentityMap{};
  }

  bool operator==(const ErrorFunction&) const = default;

 private:
  Variant fn_;
};

inline std::string describe(const ErrorFunction& e) {
  if (const auto* a = std::get_if<AffineMap>(&e.variant()))
    return "affine(gain=" + std::to_string(a->gain) + ", offset=" + std::to_string(a->offset) + ")";
  if (const auto* s = std::get_if<SymbolMap>(&e.variant())) {
    std::string out = "remap(";
    for (const auto& [from, to] : s->pi.mapping()) out += std::to_string(from) + "->" + std::to_string(to) + " ";
    if (out.back() == ' ') out.pop_back();
    return out + ")";
  }
  return "identity";
}

// The sender's estimate of e^-1.
struct InverseModel {
  ErrorFunction function;
  bool identified = false;
};

struct SessionConfig {
  double reference = 0.0;
  double initial_plant = 0.0;
  double q = 1e-3;
  std::size_t delay = 0;
  double gain = 1.0;  // share of the predicted delta sent each round
  unsigned box_capacity = 65;
};

struct RoundLog {
  std::size_t round;
  double delta;
  unsigned fill_bits;
  double plant;
};

// Sender (reference, inverse model, quantizer) and receiver (plant, error
// function) joined by a link with `delay` rounds of latency each way.
//
// One round:
//   1. the receiver adds e(value) for each arriving forward box and the
//      optional disturbance to its plant;
//   2. the receiver reports its plant value in a backward box;
//   3. the sender takes the report that has arrived, predicts the plant by
//      adding corrections still in flight, and emits a forward box carrying
//      e^-1(gain * delta), empty when the correction quantizes to zero.
// Backward boxes from round r reach the sender in round r + delay; forward
// boxes from round s act in round s + delay + 1.
class Session {
 public:
  Session(SessionConfig config, ErrorFunction receiver_error, InverseModel sender_inverse = {})
      : config_(config), error_(std::move(receiver_error)), inverse_(std::move(sender_inverse)),
        plant_(config.initial_plant) {
    if (!(config_.q > 0.0)) throw ConfigError("quantization step must be positive", "q");
    if (!(config_.gain > 0.0 && config_.gain <= 1.0)) throw ConfigError("gain must be in (0,1]", "gain");
    if (config_.box_capacity == 0) throw ConfigError("box capacity must be positive", "box_capacity");
    if (std::holds_alternative<SymbolMap>(error_.variant()))
      throw ConfigError("control sessions need an affine or identity error function", "error_function");
  }

  const SessionConfig& config() const noexcept { return config_; }
  const ErrorFunction& receiver_error() const noexcept { return error_; }
  const InverseModel& inverse() const noexcept { return inverse_; }
  void set_inverse(InverseModel m) { inverse_ = std::move(m); }
  void set_reference(double r) { config_.reference = r; }

  double plant() const noexcept { return plant_; }
  std::size_t rounds() const noexcept { return log_.size(); }
  const std::vector<RoundLog>& log() const noexcept { return log_; }
  const std::vector<VirtualBox>& forward_boxes() const noexcept { return sent_; }
  std::size_t backward_boxes() const noexcept { return reports_sent_; }
  std::size_t probes() const noexcept { return probes_; }

  // Passive echo of e(x) over a noiseless side exchange.
  double probe(double x) {
    ++probes_;
    return error_(x);
  }

  void advance(std::optional<double> disturbance = std::nullopt) {
    const std::size_t t = log_.size();
    const std::size_t d = config_.delay;

    while (!forward_.empty() && forward_.front().first <= t) {
      const VirtualBox& box = forward_.front().second;
      if (!box.empty()) plant_ += error_(demodulate(box, config_.q));
      forward_.pop_front();
    }
    if (disturbance) plant_ += *disturbance;

    backward_.emplace_back(t + d, plant_);
    ++reports_sent_;

    std::optional<double> report;
    while (!backward_.empty() && backward_.front().first <= t) {
      report = backward_.front().second;
      backward_.pop_front();
    }

    VirtualBox box{config_.box_capacity, {}};
    double dlt = 0.0;
    if (report) {
      while (!in_flight_.empty() && in_flight_.front().first + 2 * d + 1 <= t) in_flight_.pop_front();
      double predicted = *report;
      for (const auto& [_, effect] : in_flight_) predicted += effect;
      dlt = delta(config_.reference, predicted);
      const double correction = config_.gain * dlt;
      if (std::fabs(correction) >= config_.q / 2.0) {
        box = modulate(inverse_.function(correction), config_.q, config_.box_capacity);
        if (!box.empty()) in_flight_.emplace_back(t, expected_effect(demodulate(box, config_.q)));
      }
    }
    forward_.emplace_back(t + d + 1, box);
    sent_.push_back(box);
    log_.push_back({t, dlt, box.fill(), plant_});
  }

 private:
  // What the sender believes the receiver will make of value m.
  double expected_effect(double m) const { return inverse_.function.inverse()(m); }

  SessionConfig config_;
  ErrorFunction error_;
  InverseModel inverse_;
  double plant_;
  std::deque<std::pair<std::size_t, VirtualBox>> forward_;
  std::deque<std::pair<std::size_t, double>> backward_;
  std::deque<std::pair<std::size_t, double>> in_flight_;
  std::vector<VirtualBox> sent_;
  std::vector<RoundLog> log_;
  std::size_t reports_sent_ = 0;
  std::size_t probes_ = 0;
};

inline Session step(Session session, std::optional<double> disturbance = std::nullopt) {
  session.advance(disturbance);
  return session;
}

inline std::string to_csv(const std::vector<RoundLog>& log) {
  std::string out = "round,delta,fill_bits,plant_value,lag\n";
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%u,%.17g,\n", r.round, r.delta, r.fill_bits, r.plant);
    out += buf;
  }
  return out;
}

enum class ErrorFamily { Affine, Remap };

namespace detail {

template <typename Echo>
InverseModel identify(Echo&& echo, ErrorFamily family, const std::vector<int>& alphabet) {
  if (family == ErrorFamily::Affine) {
    const double b = echo(0.0);
    const double a = echo(1.0) - b;
    if (a == 0.0) throw ConfigError("e(1) == e(0): receiver error function is not invertible", "error_function");
    if (a == 1.0 && b == 0.0) return {IdentityMap{}, true};
    return {ErrorFunction(AffineMap{a, b}).inverse(), true};
  }
  if (alphabet.empty()) throw ConfigError("remap identification needs the code set", "alphabet");
  std::map<int, int> inv;
  for (int s : alphabet) {
    const double r = echo(static_cast<double>(s));
    if (r != std::round(r)) throw ConfigError("probe response is not a symbol", "error_function");
    if (!inv.emplace(static_cast<int>(r), s).second)
      throw ConfigError("two symbols map to " + std::to_string(static_cast<int>(r)) + ": not invertible",
                        "error_function");
  }
  return {SymbolMap{Permutation(std::move(inv))}, true};
}

}  // namespace detail

// Probe the receiver and invert what it does. Affine: probes 0 and 1 give
// offset = e(0) and gain = e(1) - e(0). Remap: one probe per symbol of the
// code set.
inline InverseModel identify_error_model(Session& session, ErrorFamily family, const std::vector<int>& alphabet = {}) {
  return detail::identify([&](double x) { return session.probe(x); }, family, alphabet);
}

// Same against a bare error function, for symbol maps that cannot drive a
// control session. `probes` receives the number of probes used.
inline InverseModel identify_error_model(const ErrorFunction& e, ErrorFamily family,
                                         const std::vector<int>& alphabet = {}, std::size_t* probes = nullptr) {
  std::size_t used = 0;
  InverseModel m = detail::identify(
      [&](double x) {
        ++used;
        return e(x);
      },
      family, alphabet);
  if (probes) *probes = used;
  return m;
}

// Corrective information for a RAM region: the positions to flip back.
struct RamPatch {
  std::vector<std::size_t> positions;
  std::size_t patch_bits = 0;    // one per flipped bit
  std::size_t address_bits = 0;  // positions.size() * ceil(log2(length))
};

inline RamPatch ram_monitor(const std::vector<bool>& memory, const std::vector<bool>& backup) {
  if (memory.size() != backup.size())
    throw ConfigError("memory has " + std::to_string(memory.size()) + " bits, backup " + std::to_string(backup.size()));
  RamPatch p;
  for (std::size_t i = 0; i < memory.size(); ++i)
    if (memory[i] != backup[i]) p.positions.push_back(i);
  std::size_t width = 1;
  while ((std::size_t{1} << width) < memory.size()) ++width;
  p.patch_bits = p.positions.size();
  p.address_bits = p.positions.size() * width;
  return p;
}

inline void apply_patch(std::vector<bool>& memory, const RamPatch& patch) {
  for (std::size_t i : patch.positions) memory.at(i) = !memory.at(i);
}

struct AdapterRound {
  std::size_t round;
  int driver;
  int driven;
  int lag;
};

// Driver cycles a->b->c->d (0..3) and sends its state through the remap;
// the driven automaton adopts what it receives. From round install_at + 1
// the receiver first applies the adapter pi^-1.
inline std::vector<AdapterRound> run_adapter_scenario(const Permutation& pi, std::size_t rounds,
                                                      std::optional<std::size_t> install_at = std::nullopt) {
  constexpr int n = 4;
  if (rounds < 1) throw ConfigError("need at least one round", "rounds");
  if (pi.size() != n) throw ConfigError("remap must be a bijection over {a,b,c,d}", "pi");
  for (int s = 0; s < n; ++s)
    if (!pi.contains(s)) throw ConfigError("remap must be a bijection over {a,b,c,d}", "pi");
  const Permutation adapter = pi.inverse();
  std::vector<AdapterRound> trace;
  int driver = 0;
  for (std::size_t t = 1; t <= rounds; ++t) {
    driver = (driver + 1) % n;
    int driven = pi(driver);
    if (install_at && t > *install_at) driven = adapter(driven);
    const int diff = std::abs(driver - driven);
    trace.push_back({t, driver, driven, std::min(diff, n - diff)});
  }
  return trace;
}

inline std::string to_csv(const std::vector<AdapterRound>& trace) {
  std::string out = "round,delta,fill_bits,plant_value,lag\n";
  for (const auto& r : trace)
    out += std::to_string(r.round) + ",,," + std::to_string(r.driven) + ',' + std::to_string(r.lag) + '\n';
  return out;
}

struct Completed {
  std::string symbol;
};
struct RequestMore {
  std::vector<std::string> suffixes;
};
using Resolution = std::variant<Completed, RequestMore>;

// Completes a truncated symbol from context when the pool's prior (given its
// last observed symbol) puts at least `threshold` on one completion;
// otherwise asks the sender for the missing suffixes.
inline Resolution resolve_ambiguity(const std::string& partial, const ContextPool& pool, double threshold = 0.9) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool.alphabet()[i].starts_with(partial)) candidates.push_back(i);
  if (candidates.empty()) throw ConfigError("no symbol in the alphabet completes '" + partial + "'", "partial");
  if (candidates.size() == 1) return Completed{pool.alphabet()[candidates.front()]};
  const std::vector<double> p = pool.next_priors();
  double total = 0.0;
  for (std::size_t i : candidates) total += p[i];
  for (std::size_t i : candidates)
    if (p[i] / total >= threshold) return Completed{pool.alphabet()[i]};
  RequestMore more;
  for (std::size_t i : candidates) more.suffixes.push_back(pool.alphabet()[i].substr(partial.size()));
  return more;
}

}  // namespace gecc
