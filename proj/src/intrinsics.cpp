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

#include "tilecheck/intrinsics.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "tilecheck/diag.hpp"

namespace tilecheck::intrinsics {

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::kConfig, msg);
}

// Checks that map[lane][slot] covers [0,rows) x [0,cols) exactly once.
void check_cover(const std::string& who,
                 const std::vector<std::array<int, 2>>& map, int lanes,
                 int slots, int rows, int cols) {
  if (map.size() != static_cast<std::size_t>(lanes) * slots) {
    config_error(who + " map has " + std::to_string(map.size()) +
                 " entries, expected " + std::to_string(lanes * slots));
  }
  std::vector<char> seen(static_cast<std::size_t>(rows) * cols, 0);
  for (const auto& [r, c] : map) {
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      config_error(who + " map coordinate (" + std::to_string(r) + ", " +
                   std::to_string(c) + ") outside the tile");
    }
    char& cell = seen[static_cast<std::size_t>(r) * cols + c];
    if (cell) {
      config_error(who + " map covers (" + std::to_string(r) + ", " +
                   std::to_string(c) + ") twice");
    }
    cell = 1;
  }
  // lanes*slots == rows*cols and no duplicates implies full coverage.
  if (static_cast<std::size_t>(lanes) * slots !=
      static_cast<std::size_t>(rows) * cols) {
    config_error(who + " map size does not match its tile");
  }
}

}  // namespace

void validate(const Mfma& d) {
  if (d.m <= 0 || d.n <= 0 || d.k <= 0 || d.lanes <= 0) {
    config_error("descriptor '" + d.name + "' has non-positive dimensions");
  }
  check_cover(d.name + " A", d.a, d.lanes, d.a_slots, d.m, d.k);
  check_cover(d.name + " B", d.b, d.lanes, d.b_slots, d.k, d.n);
  check_cover(d.name + " C", d.c, d.lanes, d.c_slots, d.m, d.n);
}

const Mfma& mfma_32x32x8_bf16() {
  static const Mfma desc = [] {
    Mfma d;
    d.name = "mfma_32x32x8_bf16";
    d.m = 32;
    d.n = 32;
    d.k = 8;
    d.ab_dtype = Dtype::kBF16;
    d.c_dtype = Dtype::kFP32;
    d.lanes = 64;
    d.a_slots = 4;
    d.b_slots = 4;
    d.c_slots = 16;
    for (int l = 0; l < 64; ++l) {
      int khalf = l / 32, lane32 = l % 32;
      for (int s = 0; s < 4; ++s) {
        d.a.push_back({lane32, khalf * 4 + s});
        d.b.push_back({khalf * 4 + s, lane32});
      }
      for (int t = 0; t < 16; ++t) {
        d.c.push_back({khalf * 4 + t % 4 + (t / 4) * 8, lane32});
      }
    }
    validate(d);
    return d;
  }();
  return desc;
}

Mfma load_mfma(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open descriptor file '" + path + "'");

  Mfma d;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    auto bad = [&]() -> void {
      config_error("bad descriptor line " + std::to_string(lineno) + " in '" +
                   path + "': " + line);
    };
    if (key == "name") {
      if (!(fields >> d.name)) bad();
    } else if (key == "m" || key == "n" || key == "k" || key == "lanes" ||
               key == "a_slots" || key == "b_slots" || key == "c_slots") {
      int v = 0;
      if (!(fields >> v)) bad();
      if (key == "m") d.m = v;
      else if (key == "n") d.n = v;
      else if (key == "k") d.k = v;
      else if (key == "lanes") d.lanes = v;
      else if (key == "a_slots") d.a_slots = v;
      else if (key == "b_slots") d.b_slots = v;
      else d.c_slots = v;
    } else if (key == "ab_dtype" || key == "c_dtype") {
      std::string name;
      if (!(fields >> name)) bad();
      auto dt = dtype_from_name(name);
      if (!dt) bad();
      (key == "ab_dtype" ? d.ab_dtype : d.c_dtype) = *dt;
    } else if (key == "a" || key == "b" || key == "c") {
      int lane, slot, row, col;
      if (!(fields >> lane >> slot >> row >> col)) bad();
      auto& map = key == "a" ? d.a : key == "b" ? d.b : d.c;
      int slots = key == "a" ? d.a_slots : key == "b" ? d.b_slots : d.c_slots;
      if (slots <= 0 || lane < 0 || lane >= d.lanes || slot < 0 ||
          slot >= slots) {
        bad();
      }
      std::size_t at = static_cast<std::size_t>(lane) * slots + slot;
      if (map.size() <= at) map.resize(at + 1, {-1, -1});
      if (map[at][0] != -1) bad();  // duplicate lane/slot line
      map[at] = {row, col};
    } else {
      bad();
    }
  }
  // Maps may be filled sparsely; force exact sizes before validating.
  d.a.resize(static_cast<std::size_t>(d.lanes) * d.a_slots, {-1, -1});
  d.b.resize(static_cast<std::size_t>(d.lanes) * d.b_slots, {-1, -1});
  d.c.resize(static_cast<std::size_t>(d.lanes) * d.c_slots, {-1, -1});
  validate(d);
  return d;
}

}  // namespace tilecheck::intrinsics
