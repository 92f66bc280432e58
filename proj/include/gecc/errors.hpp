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

#include <stdexcept>
#include <string>

namespace gecc {

// Malformed configuration or argument; `path` names the offending field
// ("error_model.p") when one is known.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : std::invalid_argument(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// A fail-fast layer hit an uncorrectable symbol and stopped the run.
class TransmissionAborted : public std::runtime_error {
 public:
  TransmissionAborted(std::string layer, std::size_t symbol_index)
      : std::runtime_error("transmission aborted at layer '" + layer +
                           "', symbol " + std::to_string(symbol_index)),
        layer_(std::move(layer)),
        symbol_index_(symbol_index) {}

  const std::string& layer() const noexcept { return layer_; }
  std::size_t symbol_index() const noexcept { return symbol_index_; }

 private:
  std::string layer_;
  std::size_t symbol_index_;
};

// No well-formed tag stream exists within the edit budget.
class UnrepairableError : public std::runtime_error {
 public:
  UnrepairableError(int best_cost, int max_edits)
      : std::runtime_error("tag stream unrepairable within " +
                           std::to_string(max_edits) + " edits (best " +
                           std::to_string(best_cost) + ")"),
        best_cost_(best_cost) {}

  int best_cost() const noexcept { return best_cost_; }

 private:
  int best_cost_;
};

}  // namespace gecc
