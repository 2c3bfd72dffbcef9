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

#include <array>
#include <string>
#include <vector>

#include "tilecheck/dtype.hpp"

namespace tilecheck::intrinsics {

// One warp-collective matmul accumulation step C += A * B, described by the
// per-lane fragment maps. a/b/c give, for lane l and slot s, the (row, col)
// tile coordinate held in that slot.
struct Mfma {
  std::string name;
  int m = 0, n = 0, k = 0;
  Dtype ab_dtype = Dtype::kBF16;
  Dtype c_dtype = Dtype::kFP32;
  int lanes = 0;
  int a_slots = 0, b_slots = 0, c_slots = 0;
  std::vector<std::array<int, 2>> a, b, c;  // indexed lane * slots + slot

  std::array<int, 2> a_coord(int lane, int slot) const {
    return a[static_cast<std::size_t>(lane * a_slots + slot)];
  }
  std::array<int, 2> b_coord(int lane, int slot) const {
    return b[static_cast<std::size_t>(lane * b_slots + slot)];
  }
  std::array<int, 2> c_coord(int lane, int slot) const {
    return c[static_cast<std::size_t>(lane * c_slots + slot)];
  }

  bool operator==(const Mfma&) const = default;
};

// The built-in 32x32x8 bf16 step. Constructed in code and verified against
// the same covering invariants the loader enforces.
const Mfma& mfma_32x32x8_bf16();

// Parses a descriptor file and validates it: header fields, slot counts,
// and exact single coverage of each tile by its map. Throws kConfig.
Mfma load_mfma(const std::string& path);

// Validates an already-built descriptor (used by both entry points above).
void validate(const Mfma& desc);

}  // namespace tilecheck::intrinsics
