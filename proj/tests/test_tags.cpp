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

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "tilecheck/tags.hpp"

namespace tilecheck {
namespace {

// Reference lattice value: tags modeled symbolically, independent of the
// interning scheme under test.
struct RefTag {
  enum { kBot, kTop, kTuple } kind = kBot;
  std::vector<std::int64_t> tuple;

  bool operator==(const RefTag&) const = default;
};

RefTag ref_merge(const RefTag& a, const RefTag& b) {
  if (a.kind == RefTag::kBot) return b;
  if (b.kind == RefTag::kBot) return a;
  if (a.kind == RefTag::kTop || b.kind == RefTag::kTop) return {RefTag::kTop, {}};
  if (a.tuple == b.tuple) return a;
  return {RefTag::kTop, {}};
}

Tag to_tag(TagTable& table, const RefTag& r) {
  if (r.kind == RefTag::kBot) return kTagBottom;
  if (r.kind == RefTag::kTop) return kTagTop;
  return table.intern(r.tuple);
}

RefTag from_tag(const TagTable& table, Tag t) {
  if (t == kTagBottom) return {RefTag::kBot, {}};
  if (t == kTagTop) return {RefTag::kTop, {}};
  return {RefTag::kTuple, table.tuple(t)};
}

// Reference capped site-set union: plain sorted-set union truncated to the
// smallest kMaxWriters entries.
std::vector<std::int32_t> ref_union(std::vector<std::int32_t> a,
                                    const std::vector<std::int32_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  if (a.size() > static_cast<std::size_t>(kMaxWriters)) {
    a.resize(static_cast<std::size_t>(kMaxWriters));
  }
  return a;
}

TEST_SUITE_BEGIN("tag_lattice");

TEST_CASE("tuples intern to stable ids and render readably") {
  TagTable t;
  Tag a = t.intern({3, 1, 4});
  Tag b = t.intern({3, 1, 5});
  Tag c = t.intern({3, 1, 4});
  CHECK(a == c);
  CHECK(a != b);
  CHECK(TagTable::is_tuple(a));
  CHECK_FALSE(TagTable::is_tuple(kTagBottom));
  CHECK_FALSE(TagTable::is_tuple(kTagTop));
  CHECK(t.tuple(a) == std::vector<std::int64_t>{3, 1, 4});
  CHECK(t.str(a) == "(3, 1, 4)");
  CHECK(t.str(t.intern({7})) == "(7)");
  CHECK(t.str(kTagBottom) == "bot");
  CHECK(t.str(kTagTop) == "top");
  CHECK(t.tuple_count() == 3);
}

TEST_CASE("merge agrees with the symbolic lattice over random draws") {
  // The pool is small so equal pairs, bottom, and top all occur often.
  std::vector<RefTag> pool = {{RefTag::kBot, {}}, {RefTag::kTop, {}}};
  for (std::int64_t i = 0; i < 6; ++i) {
    pool.push_back({RefTag::kTuple, {i % 3, i / 3}});
    pool.push_back({RefTag::kTuple, {i, 7}});
  }

  TagTable table;
  std::mt19937 rng(20260816);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);

  int merges = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const RefTag& ra = pool[pick(rng)];
    const RefTag& rb = pool[pick(rng)];
    const RefTag& rc = pool[pick(rng)];
    Tag a = to_tag(table, ra), b = to_tag(table, rb), c = to_tag(table, rc);

    // Against the reference semantics.
    Tag ab = TagTable::merge(a, b);
    CHECK(from_tag(table, ab) == ref_merge(ra, rb));

    // Commutativity, associativity, idempotence, identity, absorption.
    CHECK(ab == TagTable::merge(b, a));
    CHECK(TagTable::merge(ab, c) == TagTable::merge(a, TagTable::merge(b, c)));
    CHECK(TagTable::merge(a, a) == a);
    CHECK(TagTable::merge(a, kTagBottom) == a);
    CHECK(TagTable::merge(a, kTagTop) == kTagTop);
    merges += 7;
  }
  CHECK(merges >= 10000);
  // Only the pool's distinct tuples were ever interned.
  CHECK(table.tuple_count() <= pool.size());
}

TEST_CASE("site sets sort, deduplicate, and keep the earliest writers") {
  ProvTable p;
  CHECK(p.sites(kProvEmpty).empty());

  Prov a = p.intern({9, 3, 7, 3, 1, 5});
  CHECK(p.sites(a) == std::vector<std::int32_t>{1, 3, 5, 7});

  Prov b = p.intern({1, 3, 5, 7});
  CHECK(a == b);

  CHECK(p.sites(p.of_site(12)) == std::vector<std::int32_t>{12});
  CHECK(p.of_site(12) == p.intern({12}));

  // Later sites fall off once the cap is hit; earlier ones never do.
  Prov c = p.unite(a, p.of_site(0));
  CHECK(p.sites(c) == std::vector<std::int32_t>{0, 1, 3, 5});
  Prov d = p.unite(a, p.of_site(40));
  CHECK(d == a);
}

TEST_CASE("capped union behaves as a join over random site sets") {
  ProvTable p;
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_int_distribution<std::int32_t> site(0, 19);

  auto draw = [&] {
    std::vector<std::int32_t> s(static_cast<std::size_t>(len(rng)));
    for (std::int32_t& v : s) v = site(rng);
    return s;
  };

  for (int trial = 0; trial < 4000; ++trial) {
    std::vector<std::int32_t> ra = draw(), rb = draw(), rc = draw();
    Prov a = p.intern(ra), b = p.intern(rb), c = p.intern(rc);

    Prov ab = p.unite(a, b);
    CHECK(p.sites(ab) == ref_union(p.sites(a), p.sites(b)));

    CHECK(ab == p.unite(b, a));
    CHECK(p.unite(ab, c) == p.unite(a, p.unite(b, c)));
    CHECK(p.unite(a, a) == a);
    CHECK(p.unite(a, kProvEmpty) == a);

    // add() is exactly union with a singleton.
    std::int32_t s = site(rng);
    CHECK(p.add(a, s) == p.unite(a, p.of_site(s)));
  }
}

TEST_SUITE_END();

}  // namespace
}  // namespace tilecheck
