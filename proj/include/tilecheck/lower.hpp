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
#include <string_view>
#include <vector>

#include "tilecheck/bind.hpp"
#include "tilecheck/intrinsics.hpp"
#include "tilecheck/ir.hpp"

namespace tilecheck {

struct LowerOptions {
  // Cap on the fully unrolled per-block program; exceeding it is a capacity
  // error, not a crash.
  std::int64_t max_instances = std::int64_t{1} << 22;
};

// Unrolls every loop, inlines index variables and constants, materializes
// scalars and implicit fragments as register declarations, validates shapes,
// views, and matmul fragments, and attaches tag functions. `extra_tags` come
// from a standalone tag file and bind before the kernel's own declarations.
ir::Program lower(const BoundKernel& bk,
                  const std::vector<ast::TagDeclStmt>& extra_tags = {},
                  const intrinsics::Mfma& desc = intrinsics::mfma_32x32x8_bf16(),
                  const LowerOptions& opts = {});

// Evaluates every guard and every accessor index of every instance for every
// (block, thread) pair and throws kSafety on the first out-of-bounds access,
// naming the statement. Selection conditions are evaluated, and only the
// taken arm's subscripts count, mirroring execution.
void check_safety(const ir::Program& prog);

}  // namespace tilecheck
