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

// Codebooks as prototype sets in signal space, decoded by classification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gecc/errors.hpp"

namespace gecc {

// A received point in signal space. Components may be ERASED (known
// position, no value).
class SignalVector {
 public:
  using Component = std::optional<double>;

  SignalVector() = default;
  explicit SignalVector(std::vector<Component> components)
      : components_(std::move(components)) {}

  static SignalVector from_values(std::span<const double> values) {
    return SignalVector(std::vector<Component>(values.begin(), values.end()));
  }

  // "0110001", "01100??" (one char per component) or whitespace separated
  // reals such as "0.25 -1 ? 3".
  static SignalVector parse(std::string_view literal) {
    if (literal.find_first_not_of(" \t,") == std::string_view::npos)
      throw ConfigError("empty signal literal");
    std::vector<Component> out;
    if (literal.find_first_of(" \t,") == std::string_view::npos) {
      for (char c : literal) {
        if (c == '0' || c == '1')
          out.emplace_back(c == '0' ? 0.0 : 1.0);
        else if (c == '?')
          out.emplace_back(std::nullopt);
        else
          throw ConfigError("bad signal literal '" + std::string(literal) + "'");
      }
      return SignalVector(std::move(out));
    }
    std::string text(literal);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
      if (tok == "?") {
        out.emplace_back(std::nullopt);
        continue;
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        throw ConfigError("bad signal component '" + tok + "'");
      out.emplace_back(v);
    }
    return SignalVector(std::move(out));
  }

  std::size_t dimension() const noexcept { return components_.size(); }
  bool erased(std::size_t i) const { return !components_.at(i).has_value(); }
  std::size_t erased_count() const noexcept {
    return static_cast<std::size_t>(std::count(components_.begin(), components_.end(), std::nullopt));
  }

  const Component& operator[](std::size_t i) const { return components_[i]; }
  Component& operator[](std::size_t i) { return components_[i]; }
  const std::vector<Component>& components() const noexcept { return components_; }

  bool is_binary() const {
    return std::all_of(components_.begin(), components_.end(), [](const Component& c) {
      return !c || *c == 0.0 || *c == 1.0;
    });
  }

  // Compact form for 0/1/? vectors, space separated otherwise.
  std::string to_string() const {
    std::string out;
    if (is_binary()) {
      for (const auto& c : components_) out += !c ? '?' : (*c == 0.0 ? '0' : '1');
      return out;
    }
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (i) os << ' ';
      if (components_[i])
        os << *components_[i];
      else
        os << '?';
    }
    return os.str();
  }

  bool operator==(const SignalVector&) const = default;

 private:
  std::vector<Component> components_;
};

struct Prototype {
  int symbol = 0;
  std::vector<double> vector;
};

// Summed squared difference over the non-erased components of `signal`.
inline double squared_distance(const SignalVector& signal, std::span<const double> prototype) {
  double d = 0.0;
  for (std::size_t i = 0; i < prototype.size(); ++i) {
    if (!signal[i]) continue;
    const double diff = *signal[i] - prototype[i];
    d += diff * diff;
  }
  return d;
}

// Legal codewords as labeled prototypes. A missing correction radius means
// unbounded.
class Codebook {
 public:
  using Radius = std::optional<double>;

  // Radius defaults to floor((d_min - 1) / 2) for 0/1 codebooks and to
  // unbounded for analog ones.
  explicit Codebook(std::vector<Prototype> prototypes) : prototypes_(std::move(prototypes)) {
    validate();
    if (is_binary())
      radius_ = std::floor((min_distance() - 1.0) / 2.0);
  }

  Codebook(std::vector<Prototype> prototypes, Radius radius)
      : prototypes_(std::move(prototypes)), radius_(radius) {
    validate();
    if (radius_ && !(*radius_ >= 0.0))
      throw ConfigError("correction radius must be non-negative");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return prototypes_.size(); }
  const std::vector<Prototype>& prototypes() const noexcept { return prototypes_; }
  const Prototype& operator[](std::size_t i) const { return prototypes_[i]; }
  Radius correction_radius() const noexcept { return radius_; }

  Codebook with_radius(Radius radius) const { return Codebook(prototypes_, radius); }

  bool is_binary() const noexcept {
    for (const auto& p : prototypes_)
      for (double v : p.vector)
        if (v != 0.0 && v != 1.0) return false;
    return true;
  }

  double min_distance() const {
    if (prototypes_.size() < 2) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prototypes_.size(); ++i)
      for (std::size_t j = i + 1; j < prototypes_.size(); ++j)
        best = std::min(best, squared_distance(SignalVector::from_values(prototypes_[i].vector),
                                               prototypes_[j].vector));
    return best;
  }

  std::optional<std::size_t> index_of(int symbol) const {
    for (std::size_t i = 0; i < prototypes_.size(); ++i)
      if (prototypes_[i].symbol == symbol) return i;
    return std::nullopt;
  }

  const Prototype& prototype(int symbol) const {
    auto i = index_of(symbol);
    if (!i) throw ConfigError("unknown symbol " + std::to_string(symbol));
    return prototypes_[*i];
  }

  SignalVector encode(int symbol) const { return SignalVector::from_values(prototype(symbol).vector); }

 private:
  void validate() {
    if (prototypes_.empty()) throw ConfigError("codebook has no prototypes");
    dimension_ = prototypes_.front().vector.size();
    if (dimension_ == 0) throw ConfigError("codebook dimension must be positive");
    std::set<int> symbols;
    std::set<std::vector<double>> vectors;
    for (const auto& p : prototypes_) {
      if (p.vector.size() != dimension_)
        throw ConfigError("prototype " + std::to_string(p.symbol) + " has " +
                          std::to_string(p.vector.size()) + " components, expected " +
                          std::to_string(dimension_));
      if (!symbols.insert(p.symbol).second)
        throw ConfigError("duplicate symbol id " + std::to_string(p.symbol));
      if (!vectors.insert(p.vector).second)
        throw ConfigError("duplicate prototype vector for symbol " + std::to_string(p.symbol));
    }
  }

  std::vector<Prototype> prototypes_;
  std::size_t dimension_ = 0;
  Radius radius_;
};

// Decode outcomes. Ties and out-of-radius inputs are detect-only.
struct ExactMatch {
  int symbol;
  bool operator==(const ExactMatch&) const = default;
};
struct Corrected {
  int symbol;
  double distance;
  bool operator==(const Corrected&) const = default;
};
struct DetectedUncorrectable {
  double distance;  // to the nearest prototype
  bool operator==(const DetectedUncorrectable&) const = default;
};
struct Ambiguous {
  std::vector<int> symbols;
  double distance;
  bool operator==(const Ambiguous&) const = default;
};

using DecodeOutcome = std::variant<ExactMatch, Corrected, DetectedUncorrectable, Ambiguous>;

inline std::optional<int> decoded_symbol(const DecodeOutcome& outcome) {
  if (auto* e = std::get_if<ExactMatch>(&outcome)) return e->symbol;
  if (auto* c = std::get_if<Corrected>(&outcome)) return c->symbol;
  return std::nullopt;
}

inline bool is_uncorrectable(const DecodeOutcome& outcome) { return !decoded_symbol(outcome).has_value(); }

inline std::string describe(const DecodeOutcome& outcome) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ExactMatch>) {
          os << "exact " << o.symbol;
        } else if constexpr (std::is_same_v<T, Corrected>) {
          os << "corrected " << o.symbol << " distance " << o.distance;
        } else if constexpr (std::is_same_v<T, DetectedUncorrectable>) {
          os << "uncorrectable distance " << o.distance;
        } else {
          os << "ambiguous";
          for (int s : o.symbols) os << ' ' << s;
          os << " distance " << o.distance;
        }
      },
      outcome);
  return os.str();
}

struct DistanceRow {
  int symbol;
  double distance;
};

namespace detail {

inline void check_signal(const Codebook& book, const SignalVector& signal) {
  if (signal.dimension() != book.dimension())
    throw ConfigError("signal has dimension " + std::to_string(signal.dimension()) +
                      ", codebook expects " + std::to_string(book.dimension()));
  if (signal.erased_count() == signal.dimension())
    throw ConfigError("all signal components are erased");
}

inline bool ties(double a, double b) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Argmin over `scores` with tie detection; +inf rows never win.
inline DecodeOutcome classify(const Codebook& book, std::span<const double> scores,
                              std::span<const double> distances, bool apply_radius) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] < scores[best]) best = i;
  const double min_distance = distances[best];
  if (apply_radius && book.correction_radius() && min_distance > *book.correction_radius())
    return DetectedUncorrectable{min_distance};
  std::vector<int> tied;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (ties(scores[i], scores[best])) tied.push_back(book[i].symbol);
  if (tied.size() > 1) return Ambiguous{std::move(tied), min_distance};
  if (min_distance == 0.0) return ExactMatch{book[best].symbol};
  return Corrected{book[best].symbol, min_distance};
}

}  // namespace detail

inline std::vector<DistanceRow> distance_table(const Codebook& book, const SignalVector& signal) {
  detail::check_signal(book, signal);
  std::vector<DistanceRow> rows;
  rows.reserve(book.size());
  for (const auto& p : book.prototypes()) rows.push_back({p.symbol, squared_distance(signal, p.vector)});
  return rows;
}

// Nearest-neighbor classification over non-erased components.
inline DecodeOutcome nn_decode(const Codebook& book, const SignalVector& signal) {
  detail::check_signal(book, signal);
  std::vector<double> d(book.size());
  for (std::size_t i = 0; i < book.size(); ++i) d[i] = squared_distance(signal, book[i].vector);
  return detail::classify(book, d, d, true);
}

// Prior-biased decoding: argmin of distance - lambda * ln(prior). With
// lambda == 0 this is nn_decode. For lambda > 0 the priors carry the extra
// redundancy, so the correction radius is not applied; zero-prior symbols
// are excluded. `priors` follow codebook order.
inline DecodeOutcome map_decode(const Codebook& book, const SignalVector& signal,
                                std::span<const double> priors, double lambda) {
  detail::check_signal(book, signal);
  if (priors.size() != book.size())
    throw ConfigError("expected " + std::to_string(book.size()) + " priors, got " +
                      std::to_string(priors.size()));
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  double total = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw ConfigError("priors must be non-negative");
    total += p;
  }
  if (total <= 0.0) throw ConfigError("all priors are zero");
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("priors must sum to 1");
  if (lambda == 0.0) return nn_decode(book, signal);

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(book.size()), score(book.size());
  for (std::size_t i = 0; i < book.size(); ++i) {
    d[i] = squared_distance(signal, book[i].vector);
    score[i] = priors[i] > 0.0 ? d[i] - lambda * std::log(priors[i]) : inf;
  }
  return detail::classify(book, score, d, false);
}

// The 16 legal Hamming(7,4) words in the classic listing order; symbol k is
// the k-th word, so nibble value v travels as symbol v + 1.
inline Codebook hamming74_codebook() {
  static constexpr std::string_view words[16] = {
      "0000000", "1110000", "1001100", "0111100", "0101010", "1011010", "1100110", "0010110",
      "1101001", "0011001", "0100101", "1010101", "1000011", "0110011", "0001111", "1111111"};
  std::vector<Prototype> protos;
  for (int i = 0; i < 16; ++i) {
    Prototype p{i + 1, {}};
    for (char c : words[i]) p.vector.push_back(c == '1' ? 1.0 : 0.0);
    protos.push_back(std::move(p));
  }
  return Codebook(std::move(protos), 1.0);
}

// Two prototypes, all-zeros (symbol 1) and all-ones (symbol 2), decoded by
// majority.
inline Codebook repetition_codebook(std::size_t k) {
  if (k == 0) throw ConfigError("repetition factor must be positive");
  return Codebook({{1, std::vector<double>(k, 0.0)}, {2, std::vector<double>(k, 1.0)}});
}

// Text table: one prototype per line, "symbol-id: v1 v2 ... vD". Blank lines
// and '#' comments are ignored.
inline Codebook parse_codebook(std::string_view text, std::optional<Codebook::Radius> radius = std::nullopt) {
  std::vector<Prototype> protos;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ConfigError("missing ':'", "line " + std::to_string(lineno));
    Prototype p;
    try {
      std::size_t used = 0;
      std::string id = line.substr(0, colon);
      p.symbol = std::stoi(id, &used);
      if (id.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(id);
    } catch (const std::exception&) {
      throw ConfigError("bad symbol id", "line " + std::to_string(lineno));
    }
    SignalVector v = SignalVector::parse(line.substr(colon + 1) + " ");
    for (const auto& c : v.components()) {
      if (!c) throw ConfigError("prototype components cannot be erased", "line " + std::to_string(lineno));
      p.vector.push_back(*c);
    }
    protos.push_back(std::move(p));
  }
  return radius ? Codebook(std::move(protos), *radius) : Codebook(std::move(protos));
}

inline std::string format_codebook(const Codebook& book) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& p : book.prototypes()) {
    os << p.symbol << ':';
    for (double v : p.vector) os << ' ' << v;
    os << '\n';
  }
  return os.str();
}

// x net bits diluted into `gross` transmitted bits.
struct RedundancyBudget {
  std::uint64_t net_bits;
  std::uint64_t gross_bits;
  std::uint64_t compensable;  // d = gross - x

  double dilution() const noexcept {
    return static_cast<double>(net_bits) / static_cast<double>(gross_bits);
  }
};

inline RedundancyBudget redundancy_budget(std::uint64_t net, std::uint64_t gross) {
  if (net < 1) throw ConfigError("net bits must be positive");
  if (gross < net) throw ConfigError("gross bits must be >= net bits");
  return {net, gross, gross - net};
}

// Probability that a majority vote over k independent copies, each wrong
// with probability p, is wrong. k must be odd.
inline double majority_residual(double p, unsigned k) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double lp = std::log(p), lq = std::log1p(-p);
  const double lk = std::lgamma(k + 1.0);
  double sum = 0.0;
  for (unsigned i = k / 2 + 1; i <= k; ++i)
    sum += std::exp(lk - std::lgamma(i + 1.0) - std::lgamma(k - i + 1.0) + i * lp + (k - i) * lq);
  return std::min(sum, 1.0);
}

struct RecodePlan {
  std::map<std::string, unsigned> repetitions;  // k_s, odd
  double target;
};

// Per-symbol odd repetition count: the smallest k with majority residual at
// the symbol's observed error rate <= target.
inline RecodePlan adaptive_recode(const std::map<std::string, double>& rates, double target,
                                  unsigned max_repetitions = 100001) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("target must be in (0,1)");
  RecodePlan plan{{}, target};
  for (const auto& [symbol, rate] : rates) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("rate must be in [0,1)", symbol);
    if (rate >= 0.5) throw ConfigError("unprotectable symbol: majority vote cannot converge at rate >= 0.5", symbol);
    unsigned k = 1;
    while (majority_residual(rate, k) > target) {
      k += 2;
      if (k > max_repetitions) throw ConfigError("target unreachable within repetition limit", symbol);
    }
    plan.repetitions[symbol] = k;
  }
  return plan;
}

enum class Reliability {
  UnconditionallyReliable,
  ConditionallyReliable,
  ConditionallyUnreliable,
  UnconditionallyUnreliable,
};

inline std::string_view to_string(Reliability r) {
  switch (r) {
    case Reliability::UnconditionallyReliable: return "unconditionally-reliable";
    case Reliability::ConditionallyReliable: return "conditionally-reliable";
    case Reliability::ConditionallyUnreliable: return "conditionally-unreliable";
    case Reliability::UnconditionallyUnreliable: return "unconditionally-unreliable";
  }
  return "?";
}

// Class boundaries on the observed flip rate, ascending.
struct ReliabilityThresholds {
  double reliable = 0.001;
  double conditional = 0.1;
  double unreliable = 0.4;
};

struct ReliabilityProfile {
  std::vector<double> rates;
  std::vector<Reliability> classes;
};

inline ReliabilityProfile reliability_profile(std::span<const std::uint64_t> flips, std::uint64_t trials,
                                              const ReliabilityThresholds& t = {}) {
  if (trials == 0) throw ConfigError("trial count must be positive");
  if (!(t.reliable <= t.conditional && t.conditional <= t.unreliable))
    throw ConfigError("reliability thresholds must be ascending");
  ReliabilityProfile out;
  for (std::uint64_t f : flips) {
    if (f > trials) throw ConfigError("flip count exceeds trial count");
    const double rate = static_cast<double>(f) / static_cast<double>(trials);
    out.rates.push_back(rate);
    out.classes.push_back(rate < t.reliable      ? Reliability::UnconditionallyReliable
                          : rate < t.conditional ? Reliability::ConditionallyReliable
                          : rate < t.unreliable  ? Reliability::ConditionallyUnreliable
                                                 : Reliability::UnconditionallyUnreliable);
  }
  return out;
}

}  // namespace gecc
