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

// Omission detection and structural repair: enumerated chunks, chained
// CRCs and minimum-edit repair of tag streams.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gecc/errors.hpp"

namespace gecc {

using Bytes = std::vector<std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_text(std::span<const std::uint8_t> b) { return std::string(b.begin(), b.end()); }

// Standard CRC-32 (poly 0x04C11DB7 reflected, init and xorout 0xFFFFFFFF).
inline std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in pieces for very large inputs
  constexpr std::size_t kStep = 1u << 30;
  for (std::size_t off = 0; off < data.size(); off += kStep) {
    const auto n = static_cast<uInt>(std::min(kStep, data.size() - off));
    crc = ::crc32(crc, data.data() + off, n);
  }
  return static_cast<std::uint32_t>(crc);
}

struct Chunk {
  std::uint32_t index = 0;
  Bytes payload;
  std::uint32_t crc = 0;

  bool intact() const { return crc == crc32(payload); }
  bool operator==(const Chunk&) const = default;
};

inline std::vector<Chunk> split_chunks(std::span<const std::uint8_t> message, std::size_t chunk_size) {
  if (chunk_size == 0) throw ConfigError("chunk size must be positive", "chunk_size");
  std::vector<Chunk> out;
  for (std::size_t off = 0; off < message.size(); off += chunk_size) {
    Chunk c;
    c.index = static_cast<std::uint32_t>(out.size());
    c.payload.assign(message.begin() + off, message.begin() + std::min(off + chunk_size, message.size()));
    c.crc = crc32(c.payload);
    out.push_back(std::move(c));
  }
  return out;
}

inline Bytes join_chunks(std::span<const Chunk> chunks) {
  Bytes out;
  for (const auto& c : chunks) out.insert(out.end(), c.payload.begin(), c.payload.end());
  return out;
}

// Product in GF(2^32) = GF(2)[x] / (x^32 + CRC-32 polynomial). Bit i holds
// the coefficient of x^i; the modulus is irreducible, so nonzero operands
// never multiply to zero.
inline constexpr std::uint32_t gf32_multiply(std::uint32_t a, std::uint32_t b) noexcept {
  constexpr std::uint32_t kPoly = 0x04C11DB7u;
  std::uint32_t acc = 0;
  for (int i = 31; i >= 0; --i) {
    const bool carry = acc & 0x80000000u;
    acc <<= 1;
    if (carry) acc ^= kPoly;
    if ((b >> i) & 1u) acc ^= a;
  }
  return acc;
}

struct ChainTag {
  std::uint32_t value = 0;
  bool operator==(const ChainTag&) const = default;
};

// c_0 = crc_0, c_i = c_{i-1}^2 * crc_i. Squaring the running value makes the
// product position-weighted: a plain product commutes and could not see
// reordered chunks.
inline ChainTag chain_crc(std::span<const Chunk> chunks) {
  if (chunks.empty()) throw ConfigError("chain of zero chunks");
  std::uint32_t c = chunks.front().crc;
  for (std::size_t i = 1; i < chunks.size(); ++i) c = gf32_multiply(gf32_multiply(c, c), chunks[i].crc);
  return {c};
}

// Indices in [0, declared_count) that did not arrive, ascending.
inline std::vector<std::uint32_t> detect_omission(std::span<const Chunk> received, std::uint32_t declared_count) {
  std::vector<bool> seen(declared_count, false);
  for (const auto& c : received) {
    if (c.index >= declared_count)
      throw ConfigError("chunk index " + std::to_string(c.index) + " >= declared count " +
                        std::to_string(declared_count));
    if (seen[c.index]) throw ConfigError("duplicate chunk index " + std::to_string(c.index));
    seen[c.index] = true;
  }
  std::vector<std::uint32_t> missing;
  for (std::uint32_t i = 0; i < declared_count; ++i)
    if (!seen[i]) missing.push_back(i);
  return missing;
}

namespace detail {

inline void put_be32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline std::uint32_t get_be32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | in[at + i];
  return v;
}

}  // namespace detail

// Length-prefixed records: index, length, payload, crc; integers are
// 4-byte big-endian.
inline Bytes write_chunk_records(std::span<const Chunk> chunks) {
  Bytes out;
  for (const auto& c : chunks) {
    detail::put_be32(out, c.index);
    detail::put_be32(out, static_cast<std::uint32_t>(c.payload.size()));
    out.insert(out.end(), c.payload.begin(), c.payload.end());
    detail::put_be32(out, c.crc);
  }
  return out;
}

inline std::vector<Chunk> read_chunk_records(std::span<const std::uint8_t> data) {
  std::vector<Chunk> out;
  std::size_t at = 0;
  while (at < data.size()) {
    if (data.size() - at < 8) throw ConfigError("truncated chunk header at byte " + std::to_string(at));
    Chunk c;
    c.index = detail::get_be32(data, at);
    const std::uint32_t len = detail::get_be32(data, at + 4);
    at += 8;
    if (data.size() - at < std::size_t{len} + 4)
      throw ConfigError("truncated chunk " + std::to_string(c.index));
    c.payload.assign(data.begin() + at, data.begin() + at + len);
    at += len;
    c.crc = detail::get_be32(data, at);
    at += 4;
    out.push_back(std::move(c));
  }
  return out;
}

struct TagToken {
  enum class Kind { Open, Close, Text };

  Kind kind = Kind::Text;
  std::string value;  // tag name, or opaque text content

  static TagToken open(std::string name) { return {Kind::Open, std::move(name)}; }
  static TagToken close(std::string name) { return {Kind::Close, std::move(name)}; }
  static TagToken text(std::string content = {}) { return {Kind::Text, std::move(content)}; }

  bool is_tag() const noexcept { return kind != Kind::Text; }
  bool operator==(const TagToken&) const = default;
};

using TagStream = std::vector<TagToken>;

inline bool well_formed(const TagStream& stream) {
  std::vector<std::string_view> open;
  for (const auto& t : stream) {
    if (t.kind == TagToken::Kind::Open) {
      open.push_back(t.value);
    } else if (t.kind == TagToken::Kind::Close) {
      if (open.empty() || open.back() != t.value) return false;
      open.pop_back();
    }
  }
  return open.empty();
}

// One token per line: "open NAME", "close NAME", "text" or "text CONTENT".
inline TagStream parse_tag_stream(std::string_view text) {
  TagStream out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto start = line.find_first_not_of(" \t");
    const auto space = line.find(' ', start);
    const std::string keyword = line.substr(start, space == std::string::npos ? std::string::npos : space - start);
    std::string rest = space == std::string::npos ? std::string() : line.substr(space + 1);
    if (keyword == "text") {
      out.push_back(TagToken::text(std::move(rest)));
    } else if (keyword == "open" || keyword == "close") {
      if (rest.empty() || rest.find(' ') != std::string::npos)
        throw ConfigError("expected exactly one tag name", "line " + std::to_string(lineno));
      out.push_back(keyword == "open" ? TagToken::open(std::move(rest)) : TagToken::close(std::move(rest)));
    } else {
      throw ConfigError("unknown token '" + keyword + "'", "line " + std::to_string(lineno));
    }
  }
  return out;
}

inline std::string format_tag_stream(const TagStream& stream) {
  std::string out;
  for (const auto& t : stream) {
    switch (t.kind) {
      case TagToken::Kind::Open: out += "open " + t.value; break;
      case TagToken::Kind::Close: out += "close " + t.value; break;
      case TagToken::Kind::Text: out += t.value.empty() ? "text" : "text " + t.value; break;
    }
    out += '\n';
  }
  return out;
}

struct TagEdit {
  enum class Kind { Substitute = 0, Insert = 1, Delete = 2 };

  Kind kind;
  std::size_t position;  // token index; for Insert, the token it precedes
  TagToken token;        // replacement or inserted token; the removed token for Delete

  bool operator==(const TagEdit&) const = default;
};

inline std::string_view to_string(TagEdit::Kind k) {
  switch (k) {
    case TagEdit::Kind::Substitute: return "substitute";
    case TagEdit::Kind::Insert: return "insert";
    case TagEdit::Kind::Delete: return "delete";
  }
  return "?";
}

struct RepairResult {
  TagStream repaired;
  std::vector<TagEdit> script;
  int cost = 0;
};

namespace detail {

struct RepairPath {
  int cost = 0;
  int substitutions = 0;
  int insertions = 0;
  std::vector<TagEdit> edits;
};

inline int token_rank(const TagToken& t, const std::vector<std::string>& alphabet) {
  const auto it = std::find(alphabet.begin(), alphabet.end(), t.value);
  return static_cast<int>(t.kind) * 1024 + static_cast<int>(it - alphabet.begin());
}

// Inserted closes rank latest-first, so a repaired tag encloses as much of
// the original content as possible.
inline std::size_t place(const TagEdit& e) {
  const bool late = e.kind == TagEdit::Kind::Insert && e.token.kind == TagToken::Kind::Close;
  return late ? std::numeric_limits<std::size_t>::max() - e.position : e.position;
}

// Total order on equal-budget repairs: fewer edits, then more substitutions,
// then more insertions, then edit places lexicographically. Appending the
// same suffix preserves the order, which keeps forward DP exact.
inline bool better(const RepairPath& a, const RepairPath& b, const std::vector<std::string>& alphabet) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.substitutions != b.substitutions) return a.substitutions > b.substitutions;
  if (a.insertions != b.insertions) return a.insertions > b.insertions;
  for (std::size_t i = 0; i < std::min(a.edits.size(), b.edits.size()); ++i) {
    const auto& x = a.edits[i];
    const auto& y = b.edits[i];
    if (place(x) != place(y)) return place(x) < place(y);
    if (x.kind != y.kind) return x.kind < y.kind;
    const int rx = token_rank(x.token, alphabet), ry = token_rank(y.token, alphabet);
    if (rx != ry) return rx < ry;
  }
  return a.edits.size() < b.edits.size();
}

inline TagStream apply_script(const TagStream& stream, const std::vector<TagEdit>& script) {
  TagStream out;
  std::size_t e = 0;
  for (std::size_t i = 0; i <= stream.size(); ++i) {
    while (e < script.size() && script[e].position == i && script[e].kind == TagEdit::Kind::Insert)
      out.push_back(script[e++].token);
    if (i == stream.size()) break;
    if (e < script.size() && script[e].position == i) {
      if (script[e].kind == TagEdit::Kind::Substitute) out.push_back(script[e].token);
      ++e;
    } else {
      out.push_back(stream[i]);
    }
  }
  return out;
}

}  // namespace detail

// Minimum-edit repair of a tag stream into a properly nested one. Edits are
// unit cost: insert, delete or substitute a tag token (Open<->Close or a
// rename). Text tokens are never touched. Equal-cost repairs prefer
// substitutions, then insertions, then the earliest positions, except that
// inserted closes go as late as possible. Searches
// (position, open-tag stack) states with depth <= max_depth.
inline RepairResult repair_tags(const TagStream& stream, const std::vector<std::string>& alphabet, int max_edits,
                                std::size_t max_depth = 64) {
  using detail::RepairPath;
  using Kind = TagToken::Kind;
  if (max_edits < 0) throw ConfigError("must be non-negative", "max_edits");
  if (alphabet.empty() || alphabet.size() > 255) throw ConfigError("alphabet must hold 1..255 names", "alphabet");
  auto name_index = [&](const std::string& name) {
    const auto it = std::find(alphabet.begin(), alphabet.end(), name);
    if (it == alphabet.end()) throw ConfigError("tag name '" + name + "' is not in the alphabet", "alphabet");
    return static_cast<char>(it - alphabet.begin());
  };

  std::vector<char> idx(stream.size(), 0);
  for (std::size_t i = 0; i < stream.size(); ++i)
    if (stream[i].is_tag()) idx[i] = name_index(stream[i].value);

  // Suffix shape with names ignored: after cancelling matched pairs the
  // tags from `pos` on reduce to closes[pos] closes then opens[pos] opens.
  std::vector<int> closes(stream.size() + 1, 0), opens(stream.size() + 1, 0);
  int tags = 0;
  for (std::size_t i = stream.size(); i-- > 0;) {
    closes[i] = closes[i + 1];
    opens[i] = opens[i + 1];
    if (stream[i].kind == Kind::Close) {
      ++closes[i];
      ++tags;
    } else if (stream[i].kind == Kind::Open) {
      ++tags;
      if (closes[i] > 0) --closes[i];
      else ++opens[i];
    }
  }

  // Upper bound: the cheaper of two greedy passes that pop on a match and
  // either delete or rename a mismatched close, closing leftovers at the
  // end. Deleting every tag is the fallback.
  int budget = tags;
  for (bool rename : {false, true}) {
    std::string st;
    std::size_t peak = 0;
    int cost = 0;
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (stream[i].kind == Kind::Open) {
        st.push_back(idx[i]);
        peak = std::max(peak, st.size());
      } else if (stream[i].kind == Kind::Close) {
        if (!st.empty() && (rename || st.back() == idx[i])) {
          cost += st.back() != idx[i];
          st.pop_back();
        } else {
          ++cost;
        }
      }
    }
    cost += static_cast<int>(st.size());
    if (peak <= max_depth) budget = std::min(budget, cost);
  }

  // Lower bound on the edits still needed from (stack, pos): balancing the
  // stacked opens plus the suffix with names ignored. A string that reduces
  // to c closes then o opens needs ceil(c/2) + ceil(o/2) edits, since one
  // substitution can fix two unmatched brackets.
  auto viable = [&](const RepairPath& p, const std::string& st, std::size_t pos) {
    const int stacked = static_cast<int>(st.size());
    const int matched = std::min(stacked, closes[pos]);
    const int stray = closes[pos] - matched;
    const int unclosed = stacked - matched + opens[pos];
    return p.cost + (stray + 1) / 2 + (unclosed + 1) / 2 <= budget;
  };

  using Layer = std::map<std::string, RepairPath>;
  auto relax = [&](Layer& layer, const std::string& st, RepairPath&& p) -> bool {
    auto [it, inserted] = layer.try_emplace(st, std::move(p));
    if (inserted) return true;
    if (detail::better(p, it->second, alphabet)) {
      it->second = std::move(p);
      return true;
    }
    return false;
  };

  // Insertion edits inside one gap, expanded in cost order. Every insertion
  // costs one, so after all states of cost c - 1 are expanded the paths of
  // cost c are final.
  auto close_gap = [&](Layer& layer, std::size_t pos) {
    int lowest = budget;
    for (const auto& [_, path] : layer) lowest = std::min(lowest, path.cost);
    for (int c = lowest; c < budget; ++c) {
      std::vector<std::pair<std::string, RepairPath>> level;
      for (const auto& [st, path] : layer)
        if (path.cost == c) level.emplace_back(st, path);
      for (const auto& [st, base] : level) {
        auto extend = [&](std::string next, TagToken tok) {
          RepairPath p = base;
          p.cost += 1;
          p.insertions += 1;
          p.edits.push_back({TagEdit::Kind::Insert, pos, std::move(tok)});
          if (viable(p, next, pos)) relax(layer, next, std::move(p));
        };
        if (st.size() < max_depth)
          for (std::size_t m = 0; m < alphabet.size(); ++m)
            extend(st + static_cast<char>(m), TagToken::open(alphabet[m]));
        if (!st.empty()) extend(st.substr(0, st.size() - 1), TagToken::close(alphabet[st.back()]));
      }
    }
  };

  auto search = [&]() -> std::optional<RepairPath> {
    Layer layer;
    layer.emplace(std::string(), RepairPath{});
    for (std::size_t i = 0; i < stream.size(); ++i) {
      close_gap(layer, i);
      Layer next;
      const TagToken& tok = stream[i];
      for (const auto& [st, path] : layer) {
        if (tok.kind == Kind::Text) {
          RepairPath p = path;
          relax(next, st, std::move(p));
          continue;
        }
        const char name = idx[i];
        auto emit = [&](std::string to, RepairPath p) {
          if (viable(p, to, i + 1)) relax(next, to, std::move(p));
        };
        // keep
        if (tok.kind == Kind::Open) {
          if (st.size() < max_depth) emit(st + name, path);
        } else if (!st.empty() && st.back() == name) {
          emit(st.substr(0, st.size() - 1), path);
        }
        if (path.cost + 1 > budget) continue;
        // substitute
        for (std::size_t m = 0; m < alphabet.size() && st.size() < max_depth; ++m) {
          if (tok.kind == Kind::Open && static_cast<char>(m) == name) continue;
          RepairPath p = path;
          p.cost += 1;
          p.substitutions += 1;
          p.edits.push_back({TagEdit::Kind::Substitute, i, TagToken::open(alphabet[m])});
          emit(st + static_cast<char>(m), std::move(p));
        }
        if (!st.empty() && !(tok.kind == Kind::Close && st.back() == name)) {
          RepairPath p = path;
          p.cost += 1;
          p.substitutions += 1;
          p.edits.push_back({TagEdit::Kind::Substitute, i, TagToken::close(alphabet[st.back()])});
          emit(st.substr(0, st.size() - 1), std::move(p));
        }
        // delete
        RepairPath p = path;
        p.cost += 1;
        p.edits.push_back({TagEdit::Kind::Delete, i, tok});
        emit(st, std::move(p));
      }
      layer = std::move(next);
    }
    close_gap(layer, stream.size());
    const auto done = layer.find(std::string());
    return done == layer.end() ? std::nullopt : std::optional<RepairPath>(done->second);
  };

  // Deepen the budget from the lower bound; the first budget that admits a
  // repair yields the optimum.
  const int greedy = budget;
  std::optional<RepairPath> best;
  for (budget = std::min(greedy, (closes[0] + 1) / 2 + (opens[0] + 1) / 2); budget <= greedy && !best; ++budget)
    best = search();
  if (!best) throw UnrepairableError(greedy, max_edits);
  if (best->cost > max_edits) throw UnrepairableError(best->cost, max_edits);
  RepairResult result;
  result.script = best->edits;
  result.cost = best->cost;
  result.repaired = detail::apply_script(stream, result.script);
  return result;
}

}  // namespace gecc
