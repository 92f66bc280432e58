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

// Nested channel layers with per-layer residual-error accounting, the
// octagon contextual code and first-order context pools.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gecc/channel.hpp"
#include "gecc/codespace.hpp"
#include "gecc/errors.hpp"
#include "gecc/framing.hpp"
#include "gecc/rng.hpp"

namespace gecc {

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    out.emplace_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

enum class TolerancePolicy { FailFast, PassResidual };

inline std::string_view to_string(TolerancePolicy p) {
  return p == TolerancePolicy::FailFast ? "fail-fast" : "pass-residual";
}

struct LayerDecode {
  std::string upper;
  std::vector<DecodeOutcome> outcomes;
};

// Shared surface of every layer. Messages handed between layers are byte
// strings; `units` splits a layer's lower representation into the
// positions used for error accounting.
class LayerBase {
 public:
  LayerBase(std::string name, TolerancePolicy policy) : name_(std::move(name)), policy_(policy) {}
  virtual ~LayerBase() = default;

  const std::string& name() const noexcept { return name_; }
  TolerancePolicy policy() const noexcept { return policy_; }

  // Symbols of the message this layer hands upward, and the net bits each
  // one carries. Used for top-level residual rates.
  virtual std::vector<std::string> upper_units(const std::string& upper) const = 0;
  virtual double upper_unit_bits() const = 0;

 protected:
  void check(const LayerDecode& d) const {
    if (policy_ != TolerancePolicy::FailFast) return;
    for (std::size_t i = 0; i < d.outcomes.size(); ++i)
      if (is_uncorrectable(d.outcomes[i])) throw TransmissionAborted(name_, i);
  }

 private:
  std::string name_;
  TolerancePolicy policy_;
};

class Layer : public LayerBase {
 public:
  using LayerBase::LayerBase;

  virtual std::string encode(const std::string& upper) const = 0;
  virtual LayerDecode decode_raw(const std::string& lower) const = 0;
  virtual std::vector<std::string> units(const std::string& lower) const = 0;

  // The lower-side form of what the layer decided, compared against the
  // reference to count errors out.
  virtual std::string decided_lower(const LayerDecode& d, const std::string& /*received*/) const {
    return encode(d.upper);
  }

  // Throws TransmissionAborted for fail-fast layers.
  LayerDecode decode(const std::string& lower) const {
    LayerDecode d = decode_raw(lower);
    check(d);
    return d;
  }
};

// The single layer that meets the channel.
class PhysicalLayer : public LayerBase {
 public:
  using LayerBase::LayerBase;

  virtual SignalFrame encode(const std::string& upper) const = 0;
  virtual LayerDecode decode_raw(const SignalFrame& frame) const = 0;
  virtual std::vector<std::string> units(const SignalFrame& frame) const = 0;
  // Channel uses per transmitted frame component.
  virtual std::size_t gross_bits(const SignalFrame& frame) const {
    std::size_t n = 0;
    for (const auto& v : frame.vectors) n += v.dimension();
    return n;
  }

  LayerDecode decode(const SignalFrame& frame) const {
    LayerDecode d = decode_raw(frame);
    check(d);
    return d;
  }
};

// Bytes -> groups of `bits_per_symbol` bits (MSB first) -> prototypes. Group
// value v travels as the codebook's v-th prototype.
class CodebookLayer final : public PhysicalLayer {
 public:
  CodebookLayer(std::string name, Codebook book, unsigned bits_per_symbol,
                TolerancePolicy policy = TolerancePolicy::PassResidual)
      : PhysicalLayer(std::move(name), policy), book_(std::move(book)), bits_(bits_per_symbol) {
    if (bits_ == 0 || 8 % bits_ != 0) throw ConfigError("bits per symbol must divide 8", "bits");
    if (book_.size() < (std::size_t{1} << bits_))
      throw ConfigError("codebook has fewer than 2^bits prototypes", "bits");
  }

  const Codebook& codebook() const noexcept { return book_; }
  unsigned bits_per_symbol() const noexcept { return bits_; }

  SignalFrame encode(const std::string& upper) const override {
    SignalFrame f;
    for (unsigned v : symbols_of(upper)) f.vectors.push_back(SignalVector::from_values(book_[v].vector));
    return f;
  }

  LayerDecode decode_raw(const SignalFrame& frame) const override {
    LayerDecode d;
    std::vector<unsigned> values;
    for (const auto& v : frame.vectors) {
      DecodeOutcome o = decode_one(v);
      values.push_back(value_of(o, v));
      d.outcomes.push_back(std::move(o));
    }
    // a partial trailing byte (after omissions) is dropped
    const unsigned per_byte = 8 / bits_;
    for (std::size_t i = 0; i + per_byte <= values.size(); i += per_byte) {
      unsigned byte = 0;
      for (unsigned k = 0; k < per_byte; ++k) byte = (byte << bits_) | values[i + k];
      d.upper.push_back(static_cast<char>(byte));
    }
    return d;
  }

  std::vector<std::string> units(const SignalFrame& frame) const override {
    std::vector<std::string> out;
    const bool binary = book_.is_binary();
    for (const auto& v : frame.vectors)
      for (std::size_t i = 0; i < v.dimension(); ++i) {
        if (!v[i]) {
          out.emplace_back("?");
        } else if (binary) {
          out.emplace_back(*v[i] >= 0.5 ? "1" : "0");
        } else {
          std::ostringstream os;
          os.precision(3);
          os << *v[i];
          out.push_back(os.str());
        }
      }
    return out;
  }

  std::vector<std::string> upper_units(const std::string& upper) const override {
    std::vector<std::string> out;
    for (unsigned v : symbols_of(upper)) out.push_back(std::to_string(v));
    return out;
  }
  double upper_unit_bits() const override { return bits_; }

 private:
  std::vector<unsigned> symbols_of(const std::string& upper) const {
    std::vector<unsigned> out;
    const unsigned mask = (1u << bits_) - 1;
    for (unsigned char c : upper)
      for (int shift = 8 - static_cast<int>(bits_); shift >= 0; shift -= static_cast<int>(bits_))
        out.push_back((c >> shift) & mask);
    return out;
  }

  DecodeOutcome decode_one(const SignalVector& v) const {
    if (v.dimension() != book_.dimension() || v.erased_count() == v.dimension())
      return DetectedUncorrectable{std::numeric_limits<double>::infinity()};
    return nn_decode(book_, v);
  }

  // Best guess for pass-residual delivery when the outcome is detect-only.
  unsigned value_of(const DecodeOutcome& o, const SignalVector& v) const {
    std::optional<int> symbol = decoded_symbol(o);
    if (!symbol) {
      if (const auto* a = std::get_if<Ambiguous>(&o)) {
        symbol = a->symbols.front();
      } else if (v.dimension() == book_.dimension() && v.erased_count() < v.dimension()) {
        const auto rows = distance_table(book_, v);
        symbol = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
                   return a.distance < b.distance;
                 })->symbol;
      } else {
        symbol = book_[0].symbol;
      }
    }
    const auto idx = static_cast<unsigned>(*book_.index_of(*symbol));
    return idx < (1u << bits_) ? idx : 0u;
  }

  Codebook book_;
  unsigned bits_;
};

// Appends a big-endian CRC-32 of the payload; a mismatch is detect-only.
class ChecksumLayer final : public Layer {
 public:
  explicit ChecksumLayer(TolerancePolicy policy = TolerancePolicy::FailFast, std::string name = "checksum")
      : Layer(std::move(name), policy) {}

  std::string encode(const std::string& upper) const override {
    std::string out = upper;
    const std::uint32_t crc = crc32(to_bytes(upper));
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((crc >> s) & 0xFF));
    return out;
  }

  LayerDecode decode_raw(const std::string& lower) const override {
    if (lower.size() < 4) return {std::string(), {DetectedUncorrectable{0.0}}};
    std::string payload = lower.substr(0, lower.size() - 4);
    std::uint32_t crc = 0;
    for (std::size_t i = lower.size() - 4; i < lower.size(); ++i) crc = (crc << 8) | static_cast<unsigned char>(lower[i]);
    if (crc == crc32(to_bytes(payload))) return {std::move(payload), {ExactMatch{0}}};
    return {std::move(payload), {DetectedUncorrectable{0.0}}};
  }

  // Detection only: the frame passes unchanged, so no position is
  // corrected or introduced here.
  std::string decided_lower(const LayerDecode&, const std::string& received) const override { return received; }

  std::vector<std::string> units(const std::string& lower) const override {
    std::vector<std::string> out;
    for (char c : lower) out.emplace_back(1, c);
    return out;
  }
  std::vector<std::string> upper_units(const std::string& upper) const override { return units(upper); }
  double upper_unit_bits() const override { return 8.0; }
};

// Words <-> a tag-wrapped line stream:
//   open msg / (open v / text WORD / close v)* / close msg
// Damaged lines are mapped back to the nearest keyword and tag name within
// edit distance 1 or dropped; with `repair` the structure is then fixed by
// repair_tags.
class TagLayer final : public Layer {
 public:
  TagLayer(bool repair, int max_edits = 8, TolerancePolicy policy = TolerancePolicy::PassResidual,
           std::string name = "tags")
      : Layer(std::move(name), policy), repair_(repair), max_edits_(max_edits) {}

  static const std::vector<std::string>& alphabet() {
    static const std::vector<std::string> names{"msg", "v"};
    return names;
  }

  std::string encode(const std::string& upper) const override {
    TagStream s{TagToken::open("msg")};
    for (auto& w : split_lines(upper)) {
      s.push_back(TagToken::open("v"));
      s.push_back(TagToken::text(w));
      s.push_back(TagToken::close("v"));
    }
    s.push_back(TagToken::close("msg"));
    return format_tag_stream(s);
  }

  LayerDecode decode_raw(const std::string& lower) const override {
    int fixes = 0;
    TagStream s = lenient_parse(lower, fixes);
    DecodeOutcome outcome = ExactMatch{0};
    if (!well_formed(s)) {
      if (!repair_) {
        outcome = DetectedUncorrectable{0.0};
      } else {
        try {
          RepairResult r = repair_tags(s, alphabet(), max_edits_);
          s = std::move(r.repaired);
          fixes += r.cost;
        } catch (const UnrepairableError& e) {
          outcome = DetectedUncorrectable{static_cast<double>(e.best_cost())};
        }
      }
    }
    if (fixes > 0 && !is_uncorrectable(outcome)) outcome = Corrected{0, static_cast<double>(fixes)};
    std::vector<std::string> words;
    for (const auto& t : s)
      if (t.kind == TagToken::Kind::Text) words.push_back(t.value);
    return {join_lines(words), {std::move(outcome)}};
  }

  std::vector<std::string> units(const std::string& lower) const override { return split_lines(lower); }
  std::vector<std::string> upper_units(const std::string& upper) const override { return split_lines(upper); }
  double upper_unit_bits() const override { return 8.0; }

 private:
  static std::optional<std::string> nearest(const std::string& word, const std::vector<std::string>& candidates) {
    std::optional<std::string> best;
    std::size_t best_d = 2, ties = 0;
    for (const auto& c : candidates) {
      const std::size_t d = levenshtein(word, c);
      if (d < best_d) {
        best_d = d;
        best = c;
        ties = 0;
      } else if (d == best_d) {
        ++ties;
      }
    }
    if (ties > 0) return std::nullopt;
    return best;
  }

  TagStream lenient_parse(const std::string& lower, int& fixes) const {
    static const std::vector<std::string> keywords{"open", "close", "text"};
    TagStream out;
    std::string body = lower;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    for (const auto& line : split_lines(body)) {
      const auto space = line.find(' ');
      const std::string kw = line.substr(0, space);
      const std::string rest = space == std::string::npos ? std::string() : line.substr(space + 1);
      auto keyword = nearest(kw, keywords);
      if (!keyword) {
        ++fixes;
        continue;
      }
      if (*keyword != kw) ++fixes;
      if (*keyword == "text") {
        out.push_back(TagToken::text(rest));
        continue;
      }
      auto name = nearest(rest, alphabet());
      if (!name) {
        ++fixes;
        continue;
      }
      if (*name != rest) ++fixes;
      out.push_back(*keyword == "open" ? TagToken::open(*name) : TagToken::close(*name));
    }
    return out;
  }

  bool repair_;
  int max_edits_;
};

// Booleans ('1'/'0') <-> words. With `correct`, synonym variants and words
// within edit distance 1 of a synonym are accepted; the nearer set wins.
class SemanticLayer final : public Layer {
 public:
  explicit SemanticLayer(bool correct, TolerancePolicy policy = TolerancePolicy::PassResidual,
                         std::string name = "semantic")
      : Layer(std::move(name), policy), correct_(correct) {}

  static const std::vector<std::string>& yes_words() {
    static const std::vector<std::string> w{"yes", "ye", "YES", "es", "yess", "ja"};
    return w;
  }
  static const std::vector<std::string>& no_words() {
    static const std::vector<std::string> w{"no", "NO", "nope", "nein"};
    return w;
  }

  // Bit for one token: Exact for canonical words, Corrected for variants.
  DecodeOutcome interpret(const std::string& word) const {
    if (word == "yes") return ExactMatch{1};
    if (word == "no") return ExactMatch{0};
    if (!correct_) return DetectedUncorrectable{static_cast<double>(std::min(levenshtein(word, "yes"), levenshtein(word, "no")))};
    auto in = [&](const std::vector<std::string>& set) { return std::find(set.begin(), set.end(), word) != set.end(); };
    if (in(yes_words())) return Corrected{1, 1.0};
    if (in(no_words())) return Corrected{0, 1.0};
    auto closest = [&](const std::vector<std::string>& set) {
      std::size_t d = std::string::npos;
      for (const auto& s : set) d = std::min(d, levenshtein(word, s));
      return d;
    };
    const std::size_t dy = closest(yes_words()), dn = closest(no_words());
    const std::size_t d = std::min(dy, dn);
    if (d > 1) return DetectedUncorrectable{static_cast<double>(d)};
    if (dy == dn) return Ambiguous{{0, 1}, static_cast<double>(d)};
    return Corrected{dy < dn ? 1 : 0, static_cast<double>(d)};
  }

  std::string encode(const std::string& upper) const override {
    std::vector<std::string> words;
    // '?' is the decoder's mark for an unreadable word and round-trips as itself
    for (char c : upper) {
      if (c == '?') {
        words.emplace_back("?");
        continue;
      }
      if (c != '0' && c != '1') throw ConfigError("semantic layer carries only '0'/'1' symbols", "message");
      words.emplace_back(c == '1' ? "yes" : "no");
    }
    return join_lines(words);
  }

  LayerDecode decode_raw(const std::string& lower) const override {
    LayerDecode d;
    for (const auto& w : split_lines(lower)) {
      DecodeOutcome o = interpret(w);
      const auto bit = decoded_symbol(o);
      d.upper.push_back(bit ? static_cast<char>('0' + *bit) : '?');
      d.outcomes.push_back(std::move(o));
    }
    return d;
  }

  std::vector<std::string> units(const std::string& lower) const override { return split_lines(lower); }
  std::vector<std::string> upper_units(const std::string& upper) const override {
    std::vector<std::string> out;
    for (char c : upper) out.emplace_back(1, c);
    return out;
  }
  double upper_unit_bits() const override { return 1.0; }

 private:
  bool correct_;
};

enum class AllocationProfile { BottomHeavy, TopHeavy, Balanced, Custom };

inline std::string_view to_string(AllocationProfile p) {
  switch (p) {
    case AllocationProfile::BottomHeavy: return "bottom-heavy";
    case AllocationProfile::TopHeavy: return "top-heavy";
    case AllocationProfile::Balanced: return "balanced";
    case AllocationProfile::Custom: return "custom";
  }
  return "?";
}

// Layers ordered top (most abstract) to bottom; the physical layer is the
// only one that meets the error model.
struct Stack {
  std::vector<std::shared_ptr<const Layer>> layers;
  std::shared_ptr<const PhysicalLayer> bottom;
  AllocationProfile profile = AllocationProfile::Custom;

  const LayerBase& top() const {
    return layers.empty() ? static_cast<const LayerBase&>(*bottom) : static_cast<const LayerBase&>(*layers.front());
  }
};

struct LayerCounts {
  std::string layer;
  std::uint64_t errors_in = 0;
  std::uint64_t corrected = 0;
  std::uint64_t introduced = 0;
  std::uint64_t errors_out = 0;

  LayerCounts& operator+=(const LayerCounts& o) {
    errors_in += o.errors_in;
    corrected += o.corrected;
    introduced += o.introduced;
    errors_out += o.errors_out;
    return *this;
  }
  bool conserved() const noexcept { return errors_out + corrected == errors_in + introduced; }
  bool operator==(const LayerCounts&) const = default;
};

// Per-layer counts in stack order (bottom last).
struct ResidualReport {
  std::vector<LayerCounts> layers;

  ResidualReport& operator+=(const ResidualReport& o) {
    if (layers.empty()) {
      layers = o.layers;
      return *this;
    }
    for (std::size_t i = 0; i < layers.size() && i < o.layers.size(); ++i) layers[i] += o.layers[i];
    return *this;
  }
  bool operator==(const ResidualReport&) const = default;
};

inline std::string to_csv(const ResidualReport& r) {
  std::string out = "layer,errors_in,corrected,introduced,errors_out\n";
  for (const auto& l : r.layers)
    out += l.layer + ',' + std::to_string(l.errors_in) + ',' + std::to_string(l.corrected) + ',' +
           std::to_string(l.introduced) + ',' + std::to_string(l.errors_out) + '\n';
  return out;
}

// Positional comparison against the noiseless reference: a position counts
// as corrected when it arrived wrong and the layer's decision is right, as
// introduced when it arrived right and the decision is wrong. Sequences of
// different length are padded, so a missing position is an error.
inline LayerCounts tally(std::string layer, const std::vector<std::string>& reference,
                         const std::vector<std::string>& received, const std::vector<std::string>& decided) {
  LayerCounts c{std::move(layer)};
  const std::size_t n = std::max({reference.size(), received.size(), decided.size()});
  auto wrong = [&](const std::vector<std::string>& v, std::size_t i) {
    return i >= v.size() || i >= reference.size() || v[i] != reference[i];
  };
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = wrong(received, i), b = wrong(decided, i);
    c.errors_in += a;
    c.errors_out += b;
    c.corrected += a && !b;
    c.introduced += !a && b;
  }
  return c;
}

struct Transmission {
  std::string received;
  ResidualReport report;
  std::size_t gross_bits = 0;  // channel uses
};

// Encode top to bottom, corrupt once, decode bottom to top. A fail-fast
// layer meeting an uncorrectable symbol throws TransmissionAborted.
inline Transmission transmit(const Stack& stack, const std::string& message, const ErrorModel& model,
                             const TrialRng& rng) {
  if (!stack.bottom) throw ConfigError("stack has no physical layer", "stack");
  const std::size_t n = stack.layers.size();
  std::vector<std::string> ref_lower(n);
  std::string cur = message;
  for (std::size_t k = 0; k < n; ++k) {
    ref_lower[k] = stack.layers[k]->encode(cur);
    cur = ref_lower[k];
  }
  const SignalFrame ref_frame = stack.bottom->encode(cur);
  const SignalFrame rx_frame = apply(model, ref_frame, rng);

  Transmission t;
  t.gross_bits = stack.bottom->gross_bits(ref_frame);
  std::vector<LayerCounts> counts(n + 1);
  LayerDecode d = stack.bottom->decode(rx_frame);
  counts[n] = tally(stack.bottom->name(), stack.bottom->units(ref_frame), stack.bottom->units(rx_frame),
                    stack.bottom->units(stack.bottom->encode(d.upper)));
  for (std::size_t k = n; k-- > 0;) {
    const Layer& layer = *stack.layers[k];
    const std::string received = std::move(d.upper);
    d = layer.decode(received);
    counts[k] = tally(layer.name(), layer.units(ref_lower[k]), layer.units(received),
                      layer.units(layer.decided_lower(d, received)));
  }
  t.received = std::move(d.upper);
  t.report.layers = std::move(counts);
  return t;
}

inline std::shared_ptr<const PhysicalLayer> hamming74_layer(TolerancePolicy policy = TolerancePolicy::PassResidual,
                                                            std::optional<double> radius = 1.0) {
  return std::make_shared<CodebookLayer>("hamming74", hamming74_codebook().with_radius(radius), 4, policy);
}

inline std::shared_ptr<const PhysicalLayer> repetition_layer(std::size_t k,
                                                             TolerancePolicy policy = TolerancePolicy::PassResidual) {
  return std::make_shared<CodebookLayer>(k == 1 ? "raw" : "repetition" + std::to_string(k), repetition_codebook(k), 1,
                                         policy);
}

// Where the corrective strength sits: Hamming bits only (bottom-heavy),
// raw bits with synonym correction only (top-heavy), or one mechanism per
// layer (balanced, the three-layer Case 1 stack).
inline Stack make_stack(AllocationProfile profile) {
  Stack s;
  s.profile = profile;
  switch (profile) {
    case AllocationProfile::BottomHeavy:
      s.layers = {std::make_shared<SemanticLayer>(false), std::make_shared<TagLayer>(false)};
      s.bottom = hamming74_layer();
      break;
    case AllocationProfile::TopHeavy:
      s.layers = {std::make_shared<SemanticLayer>(true), std::make_shared<TagLayer>(false)};
      s.bottom = repetition_layer(1);
      break;
    case AllocationProfile::Balanced:
      s.layers = {std::make_shared<SemanticLayer>(true), std::make_shared<TagLayer>(true)};
      s.bottom = hamming74_layer();
      break;
    case AllocationProfile::Custom:
      throw ConfigError("custom stacks are built layer by layer", "stack.profile");
  }
  return s;
}

struct DemoRun {
  std::string message;
  std::string received;
  ResidualReport report;
  std::uint64_t seed;
};

// The Case 1 stack: Hamming(7,4) bits at the bottom, tag repair in the
// middle, synonym booleans on top, with a seeded demonstration run.
inline std::pair<Stack, DemoRun> scenario_case1(std::uint64_t seed = 7, double flip_p = 0.004) {
  Stack stack = make_stack(AllocationProfile::Balanced);
  DemoRun run;
  run.seed = seed;
  run.message = "1011001110";
  Transmission t = transmit(stack, run.message, RandomFlip{flip_p}, TrialRng(seed));
  run.received = std::move(t.received);
  run.report = std::move(t.report);
  return {std::move(stack), std::move(run)};
}

// Eight states a..h on the unit circle, counterclockwise from angle 0. From
// context i the legal followers are i+2 (bit 0) and i+5 (bit 1), so context
// and followers are pairwise non-adjacent; c -> {e, h}.
class ContextualCodebook {
 public:
  static constexpr int kStates = 8;

  ContextualCodebook() : book_(make_book()) {}

  const Codebook& base() const noexcept { return book_; }

  static char state_name(int s) { return static_cast<char>('a' + s); }
  static int state_of(char name) {
    if (name < 'a' || name > 'h') throw ConfigError(std::string("unknown state '") + name + "'", "context");
    return name - 'a';
  }

  static int follower(int context, int bit) {
    check_state(context);
    return (context + (bit ? 5 : 2)) % kStates;
  }
  static std::array<int, 2> followers(int context) { return {follower(context, 0), follower(context, 1)}; }

  static std::optional<int> bit_of(int context, int state) {
    if (state == follower(context, 0)) return 0;
    if (state == follower(context, 1)) return 1;
    return std::nullopt;
  }

  static int angular_steps(int s, int t) {
    const int d = ((s - t) % kStates + kStates) % kStates;
    return std::min(d, kStates - d);
  }

  SignalVector encode(int state) const { return book_.encode(state); }

  static void check_state(int s) {
    if (s < 0 || s >= kStates) throw ConfigError("state must be in a..h", "context");
  }

 private:
  static Codebook make_book() {
    std::vector<Prototype> p;
    for (int s = 0; s < kStates; ++s) {
      const double angle = 2.0 * std::numbers::pi * s / kStates;
      p.push_back({s, {std::cos(angle), std::sin(angle)}});
    }
    return Codebook(std::move(p), std::nullopt);
  }

  Codebook book_;
};

struct ContextualDecode {
  std::optional<int> bit;
  std::optional<int> state;
  DecodeOutcome outcome;
};

// Nearest neighbor over all eight states; an illegal winner snaps to the
// angularly nearest legal follower.
inline ContextualDecode contextual_decode(const ContextualCodebook& book, int context, const SignalVector& signal) {
  ContextualCodebook::check_state(context);
  const auto [f0, f1] = ContextualCodebook::followers(context);
  auto snap = [&](int s) {
    const int d0 = ContextualCodebook::angular_steps(s, f0), d1 = ContextualCodebook::angular_steps(s, f1);
    if (d0 == d1) return -1;
    return d0 < d1 ? f0 : f1;
  };
  const DecodeOutcome nn = nn_decode(book.base(), signal);
  std::vector<int> winners;
  if (const auto s = decoded_symbol(nn))
    winners.push_back(*s);
  else if (const auto* a = std::get_if<Ambiguous>(&nn))
    winners = a->symbols;

  std::set<int> targets;
  for (int w : winners) targets.insert(snap(w));
  if (targets.size() != 1 || *targets.begin() < 0) return {std::nullopt, std::nullopt, Ambiguous{{f0, f1}, 0.0}};
  const int state = *targets.begin();
  const auto bit = ContextualCodebook::bit_of(context, state);
  if (winners.size() == 1 && winners.front() == state) return {bit, state, nn};
  return {bit, state, Corrected{state, squared_distance(signal, book.base()[static_cast<std::size_t>(state)].vector)}};
}

// First-order transition counts over a fixed alphabet, with add-one
// smoothed priors. A pool with no evidence for a context defers to its
// upper pool (same alphabet) and otherwise yields uniform priors.
class ContextPool {
 public:
  explicit ContextPool(std::vector<std::string> alphabet, std::shared_ptr<const ContextPool> upper = nullptr)
      : alphabet_(std::move(alphabet)), upper_(std::move(upper)) {
    if (alphabet_.empty()) throw ConfigError("alphabet must not be empty", "alphabet");
    for (std::size_t i = 0; i < alphabet_.size(); ++i)
      if (!index_.emplace(alphabet_[i], i).second) throw ConfigError("duplicate symbol '" + alphabet_[i] + "'", "alphabet");
    counts_.assign(alphabet_.size() * alphabet_.size(), 0);
    unigram_.assign(alphabet_.size(), 0);
    if (upper_ && upper_->alphabet_ != alphabet_) throw ConfigError("cascaded pools must share an alphabet", "alphabet");
  }

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return alphabet_.size(); }
  std::optional<std::size_t> previous() const noexcept { return previous_; }
  const ContextPool* upper() const noexcept { return upper_.get(); }

  std::size_t index(const std::string& symbol) const {
    const auto it = index_.find(symbol);
    if (it == index_.end()) throw ConfigError("symbol '" + symbol + "' is not in the pool alphabet", "symbol");
    return it->second;
  }

  std::uint64_t count(std::size_t from, std::size_t to) const { return counts_.at(from * size() + to); }
  bool empty() const noexcept { return observations_ == 0; }

  void observe(const std::string& symbol) {
    const std::size_t s = index(symbol);
    if (previous_) ++counts_[*previous_ * size() + s];
    ++unigram_[s];
    ++observations_;
    previous_ = s;
  }

  // Forget the running context but keep the counts.
  void reset_context() noexcept { previous_.reset(); }

  // P(next | previous); without a previous symbol, the unigram estimate.
  std::vector<double> priors(std::optional<std::size_t> previous) const {
    const std::size_t n = size();
    std::vector<std::uint64_t> row(n, 0);
    if (previous) {
      if (*previous >= n) throw ConfigError("context index out of range", "context");
      std::copy_n(counts_.begin() + static_cast<std::ptrdiff_t>(*previous * n), n, row.begin());
    } else {
      row = unigram_;
    }
    std::uint64_t total = 0;
    for (auto c : row) total += c;
    if (total == 0 && upper_) return upper_->priors(previous);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i)
      p[i] = (static_cast<double>(row[i]) + 1.0) / (static_cast<double>(total) + static_cast<double>(n));
    return p;
  }

  std::vector<double> next_priors() const { return priors(previous_); }

  double prior(const std::string& next, const std::string& given) const { return priors(index(given))[index(next)]; }

  // Count addition; commutative and associative.
  ContextPool& merge(const ContextPool& other) {
    if (other.alphabet_ != alphabet_) throw ConfigError("cannot merge pools over different alphabets", "alphabet");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    for (std::size_t i = 0; i < unigram_.size(); ++i) unigram_[i] += other.unigram_[i];
    observations_ += other.observations_;
    return *this;
  }

 private:
  std::vector<std::string> alphabet_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> unigram_;
  std::uint64_t observations_ = 0;
  std::optional<std::size_t> previous_;
  std::shared_ptr<const ContextPool> upper_;
};

inline ContextPool update_pool(ContextPool pool, const std::string& symbol) {
  pool.observe(symbol);
  return pool;
}

// Prior over the next bit {P(0), P(1)} for the layer below, from the
// higher layer's transition priors and the bits already received for the
// current symbol. `encoding` maps each pool symbol to its bit pattern; the
// context defaults to the pool's last observed symbol.
// P(next bit = 0/1) from symbol priors over `alphabet`, restricted to the
// symbols whose bit pattern continues `received_bits`. Uniform when no
// symbol does.
inline std::array<double, 2> cascade_priors(std::span<const double> symbol_priors,
                                            const std::vector<std::string>& alphabet,
                                            const std::map<std::string, std::string>& encoding,
                                            std::string_view received_bits) {
  if (symbol_priors.size() != alphabet.size()) throw ConfigError("one prior per symbol expected", "priors");
  std::array<double, 2> mass{0.0, 0.0};
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    const auto it = encoding.find(alphabet[i]);
    if (it == encoding.end()) throw ConfigError("no bit pattern for symbol '" + alphabet[i] + "'", "encoding");
    const std::string& code = it->second;
    if (code.size() <= received_bits.size() || code.compare(0, received_bits.size(), received_bits) != 0) continue;
    const char next = code[received_bits.size()];
    if (next != '0' && next != '1') throw ConfigError("bit patterns must be 0/1 strings", "encoding");
    mass[next - '0'] += symbol_priors[i];
  }
  const double total = mass[0] + mass[1];
  if (total <= 0.0) return {0.5, 0.5};
  return {mass[0] / total, mass[1] / total};
}

// Same, with the pool's priors given `context` (or its last observed symbol).
inline std::array<double, 2> cascade_priors(const ContextPool& pool, const std::map<std::string, std::string>& encoding,
                                            std::string_view received_bits,
                                            std::optional<std::string> context = std::nullopt) {
  std::optional<std::size_t> prev = context ? std::optional<std::size_t>(pool.index(*context)) : pool.previous();
  return cascade_priors(pool.priors(prev), pool.alphabet(), encoding, received_bits);
}

}  // namespace gecc
