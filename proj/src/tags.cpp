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

#include "tilecheck/tags.hpp"

#include <algorithm>

namespace tilecheck {

Tag TagTable::intern(const std::vector<std::int64_t>& tuple) {
  auto [it, fresh] =
      ids_.emplace(tuple, static_cast<Tag>(tuples_.size()) + 2);
  if (fresh) tuples_.push_back(tuple);
  return it->second;
}

std::string TagTable::str(Tag t) const {
  if (t == kTagBottom) return "bot";
  if (t == kTagTop) return "top";
  const std::vector<std::int64_t>& tp = tuple(t);
  std::string out = "(";
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(tp[i]);
  }
  out += ")";
  return out;
}

ProvTable::ProvTable() {
  sets_.emplace_back();  // kProvEmpty
  ids_.emplace(std::vector<std::int32_t>{}, kProvEmpty);
}

Prov ProvTable::intern(std::vector<std::int32_t> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  if (sites.size() > static_cast<std::size_t>(kMaxWriters)) {
    sites.resize(static_cast<std::size_t>(kMaxWriters));
  }
  auto [it, fresh] = ids_.emplace(sites, static_cast<Prov>(sets_.size()));
  if (fresh) sets_.push_back(std::move(sites));
  return it->second;
}

Prov ProvTable::unite(Prov a, Prov b) {
  if (a == b || b == kProvEmpty) return a;
  if (a == kProvEmpty) return b;
  if (a > b) std::swap(a, b);
  auto [it, fresh] = union_memo_.emplace(std::make_pair(a, b), kProvEmpty);
  if (fresh) {
    std::vector<std::int32_t> merged = sets_[static_cast<std::size_t>(a)];
    const std::vector<std::int32_t>& rhs = sets_[static_cast<std::size_t>(b)];
    merged.insert(merged.end(), rhs.begin(), rhs.end());
    it->second = intern(std::move(merged));
  }
  return it->second;
}

Prov ProvTable::add(Prov set, std::int32_t site) {
  auto [it, fresh] = add_memo_.emplace(std::make_pair(set, site), kProvEmpty);
  if (fresh) it->second = unite(set, of_site(site));
  return it->second;
}

Prov ProvTable::of_site(std::int32_t site) {
  std::size_t i = static_cast<std::size_t>(site);
  if (singleton_.size() <= i) singleton_.resize(i + 1, Prov{-1});
  if (singleton_[i] < 0) singleton_[i] = intern({site});
  return singleton_[i];
}

}  // namespace tilecheck
