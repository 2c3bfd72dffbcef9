// Copyright 2026 The Tilecheck Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tilecheck {

// A tag is an interned point of the lattice  bottom < tuple < top:
// bottom for bytes with no tracked origin, one integer tuple for bytes that
// carry exactly one logical coordinate, top once two distinct tuples merge.
using Tag = std::int32_t;

inline constexpr Tag kTagBottom = 0;
inline constexpr Tag kTagTop = 1;

// Interns integer tuples so lattice operations compare and merge in O(1).
// Tag values are only meaningful relative to the table that produced them.
class TagTable {
 public:
  // Returns the tag for this tuple, interning it on first sight.
  Tag intern(const std::vector<std::int64_t>& tuple);

  // The tuple behind a tag; valid only for is_tuple(t).
  const std::vector<std::int64_t>& tuple(Tag t) const {
    return tuples_[static_cast<std::size_t>(t) - 2];
  }

  static bool is_tuple(Tag t) { return t >= 2; }

  // Least upper bound. Bottom is the identity; two distinct tuples give top.
  static Tag merge(Tag a, Tag b) {
    if (a == b) return a;
    if (a == kTagBottom) return b;
    if (b == kTagBottom) return a;
    return kTagTop;
  }

  // "bot", "top", or "(a, b, c)".
  std::string str(Tag t) const;

  std::size_t tuple_count() const { return tuples_.size(); }

 private:
  std::map<std::vector<std::int64_t>, Tag> ids_;
  std::vector<std::vector<std::int64_t>> tuples_;
};

// A provenance value is an interned set of store sites (indices into a
// program's instance list) explaining which writes produced a byte.
using Prov = std::int32_t;

inline constexpr Prov kProvEmpty = 0;

// Reports stay readable by keeping at most this many sites per byte; unions
// past the cap keep the smallest (earliest) sites, which preserves the
// associativity, commutativity, and idempotence of the union.
inline constexpr int kMaxWriters = 4;

class ProvTable {
 public:
  ProvTable();

  // Interns a site set (sorted, deduplicated, capped to the smallest
  // kMaxWriters entries).
  Prov intern(std::vector<std::int32_t> sites);

  // Capped set union; memoized, so repeated unions are two map probes.
  Prov unite(Prov a, Prov b);

  // unite(set, {site}), memoized separately since it dominates store paths.
  Prov add(Prov set, std::int32_t site);

  // The singleton {site}, memoized per site.
  Prov of_site(std::int32_t site);

  const std::vector<std::int32_t>& sites(Prov p) const {
    return sets_[static_cast<std::size_t>(p)];
  }

  std::size_t set_count() const { return sets_.size(); }

 private:
  std::map<std::vector<std::int32_t>, Prov> ids_;
  std::vector<std::vector<std::int32_t>> sets_;
  std::map<std::pair<Prov, Prov>, Prov> union_memo_;
  std::map<std::pair<Prov, std::int32_t>, Prov> add_memo_;
  std::vector<Prov> singleton_;  // indexed by site, -1 until interned
};

}  // namespace tilecheck
