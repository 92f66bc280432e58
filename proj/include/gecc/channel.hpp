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

// Seeded, composable error models ("disturbers") acting on signal frames.

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gecc/codespace.hpp"
#include "gecc/errors.hpp"
#include "gecc/rng.hpp"

namespace gecc {

// Transmission-ordered signal vectors sharing one dimension.
struct SignalFrame {
  std::vector<SignalVector> vectors;

  std::size_t length() const noexcept { return vectors.size(); }
  bool empty() const noexcept { return vectors.empty(); }

  // One single-component vector per bit, most significant first.
  static SignalFrame from_bits(std::string_view bits) {
    SignalFrame f;
    for (char c : bits) f.vectors.push_back(SignalVector::parse(std::string_view(&c, 1)));
    return f;
  }

  std::string to_string() const {
    bool bits = true, binary = true;
    for (const auto& v : vectors) {
      bits = bits && v.dimension() == 1;
      binary = binary && v.is_binary();
    }
    const std::string sep = bits && binary ? "" : binary ? " " : " | ";
    std::string out;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (i) out += sep;
      out += vectors[i].to_string();
    }
    return out;
  }

  bool operator==(const SignalFrame&) const = default;
};

// Bijection over a finite set of integer symbols.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::map<int, int> mapping) : forward_(std::move(mapping)) {
    for (const auto& [from, to] : forward_) {
      if (!forward_.contains(to))
        throw ConfigError("permutation image " + std::to_string(to) + " is outside its domain");
      if (!inverse_.emplace(to, from).second)
        throw ConfigError("permutation is not a bijection: " + std::to_string(to) + " has two preimages");
    }
  }

  static Permutation identity(int n) {
    std::map<int, int> m;
    for (int i = 0; i < n; ++i) m[i] = i;
    return Permutation(std::move(m));
  }

  static Permutation cyclic_shift(int n, int shift) {
    std::map<int, int> m;
    for (int i = 0; i < n; ++i) m[i] = ((i + shift) % n + n) % n;
    return Permutation(std::move(m));
  }

  std::size_t size() const noexcept { return forward_.size(); }
  bool contains(int symbol) const { return forward_.contains(symbol); }
  const std::map<int, int>& mapping() const noexcept { return forward_; }

  int operator()(int symbol) const {
    auto it = forward_.find(symbol);
    if (it == forward_.end())
      throw ConfigError("symbol " + std::to_string(symbol) + " is outside the remap alphabet");
    return it->second;
  }

  Permutation inverse() const { return Permutation(inverse_); }

  bool operator==(const Permutation& o) const { return forward_ == o.forward_; }

 private:
  std::map<int, int> forward_;
  std::map<int, int> inverse_;
};

class ErrorModel;

struct NoError {};
struct RandomFlip {
  double p;
};
struct Burst {
  double p_start;
  std::size_t length;
};
struct Gaussian {
  std::vector<double> sigma;  // one entry applies to every dimension
};
struct Offset {
  std::vector<double> b;  // one entry applies to every dimension
};
struct Remap {
  Permutation pi;
};
struct Omission {
  double p_drop;
};
struct Erasure {
  double p_erase;
};
struct Compose {
  std::vector<ErrorModel> stages;
};

class ErrorModel {
 public:
  using Variant = std::variant<NoError, RandomFlip, Burst, Gaussian, Offset, Remap, Omission, Erasure, Compose>;

  ErrorModel() = default;
  template <typename T>
    requires std::is_constructible_v<Variant, T&&> && (!std::is_same_v<std::decay_t<T>, ErrorModel>)
  ErrorModel(T&& model) : model_(std::forward<T>(model)) {  // NOLINT(google-explicit-constructor)
    validate();
  }

  const Variant& variant() const noexcept { return model_; }

  template <typename T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&model_);
  }

 private:
  void validate() const;

  Variant model_;
};

namespace detail {

inline void check_probability(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probability must be in [0,1]", field);
}

inline double per_dimension(const std::vector<double>& values, std::size_t dim, const char* field) {
  if (values.size() == 1) return values[0];
  if (dim >= values.size())
    throw ConfigError("has " + std::to_string(values.size()) + " entries, frame dimension exceeds it", field);
  return values[dim];
}

inline void flip_component(SignalVector::Component& c) {
  if (!c) return;
  if (*c != 0.0 && *c != 1.0) throw ConfigError("bit flip applied to non-binary component " + std::to_string(*c));
  *c = 1.0 - *c;
}

}  // namespace detail

inline void ErrorModel::validate() const {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RandomFlip>) {
          detail::check_probability(m.p, "p");
        } else if constexpr (std::is_same_v<T, Burst>) {
          detail::check_probability(m.p_start, "p_start");
          if (m.length == 0) throw ConfigError("burst length must be positive", "length");
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          if (m.sigma.empty()) throw ConfigError("needs at least one entry", "sigma");
          for (double s : m.sigma)
            if (!(s >= 0.0)) throw ConfigError("must be non-negative", "sigma");
        } else if constexpr (std::is_same_v<T, Offset>) {
          if (m.b.empty()) throw ConfigError("needs at least one entry", "b");
        } else if constexpr (std::is_same_v<T, Omission>) {
          detail::check_probability(m.p_drop, "p_drop");
        } else if constexpr (std::is_same_v<T, Erasure>) {
          detail::check_probability(m.p_erase, "p_erase");
        } else if constexpr (std::is_same_v<T, Compose>) {
          if (m.stages.empty()) throw ConfigError("compose needs at least one stage", "stages");
        }
      },
      model_);
}

inline ErrorModel compose(std::vector<ErrorModel> models) {
  if (models.empty()) throw ConfigError("compose needs at least one stage", "stages");
  return Compose{std::move(models)};
}

// Corrupts `frame`. A pure function of (model, frame, rng key). Erased
// components stay erased and are skipped by every model; random draws are
// still consumed for them so that streams stay aligned across frames.
inline SignalFrame apply(const ErrorModel& model, SignalFrame frame, const TrialRng& rng) {
  auto engine = rng.engine();
  return std::visit(
      [&](const auto& m) -> SignalFrame {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NoError>) {
          return frame;
        } else if constexpr (std::is_same_v<T, RandomFlip>) {
          for (auto& v : frame.vectors)
            for (std::size_t d = 0; d < v.dimension(); ++d)
              if (uniform01(engine) < m.p) detail::flip_component(v[d]);
          return frame;
        } else if constexpr (std::is_same_v<T, Burst>) {
          std::size_t remaining = 0;
          for (auto& v : frame.vectors)
            for (std::size_t d = 0; d < v.dimension(); ++d) {
              const double u = uniform01(engine);
              if (remaining == 0 && u < m.p_start) remaining = m.length;
              if (remaining > 0) {
                detail::flip_component(v[d]);
                --remaining;
              }
            }
          return frame;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          std::normal_distribution<double> normal(0.0, 1.0);
          for (auto& v : frame.vectors)
            for (std::size_t d = 0; d < v.dimension(); ++d) {
              const double z = normal(engine);
              const double sigma = detail::per_dimension(m.sigma, d, "sigma");
              if (v[d]) *v[d] += sigma * z;
            }
          return frame;
        } else if constexpr (std::is_same_v<T, Offset>) {
          for (auto& v : frame.vectors)
            for (std::size_t d = 0; d < v.dimension(); ++d) {
              const double b = detail::per_dimension(m.b, d, "b");
              if (v[d]) *v[d] += b;
            }
          return frame;
        } else if constexpr (std::is_same_v<T, Remap>) {
          for (auto& v : frame.vectors)
            for (std::size_t d = 0; d < v.dimension(); ++d) {
              if (!v[d]) continue;
              const double x = *v[d];
              if (x != std::round(x))
                throw ConfigError("remap applied to non-symbol value " + std::to_string(x));
              *v[d] = m.pi(static_cast<int>(x));
            }
          return frame;
        } else if constexpr (std::is_same_v<T, Omission>) {
          SignalFrame out;
          for (auto& v : frame.vectors)
            if (!(uniform01(engine) < m.p_drop)) out.vectors.push_back(std::move(v));
          return out;
        } else if constexpr (std::is_same_v<T, Erasure>) {
          for (auto& v : frame.vectors)
            for (std::size_t d = 0; d < v.dimension(); ++d)
              if (uniform01(engine) < m.p_erase) v[d].reset();
          return frame;
        } else {
          for (std::size_t i = 0; i < m.stages.size(); ++i) frame = apply(m.stages[i], std::move(frame), rng.substream(i));
          return frame;
        }
      },
      model.variant());
}

}  // namespace gecc
