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
#include <functional>
#include <vector>

#include "tilecheck/ir.hpp"
#include "tilecheck/tags.hpp"

namespace tilecheck {

// One evaluated assert comparison: a single (thread, quantifier point) of an
// assert instance, with the element tags both sides folded to and the store
// sites that produced them.
struct Capture {
  std::int32_t code_index = -1;  // position of the assert in Program::code
  std::int64_t thread = 0;       // tid within the block
  std::vector<std::int64_t> qpoint;  // quantifier values, outermost first
  std::vector<std::int64_t> left_coord, right_coord;  // evaluated indices
  Tag left_tag = kTagBottom, right_tag = kTagBottom;
  Prov left_writers = kProvEmpty, right_writers = kProvEmpty;
  // Tag of each byte of the compared elements before folding; filled only
  // when analyze_block runs with capture_bytes set.
  std::vector<Tag> left_byte_tags, right_byte_tags;
};

// Runs the byte-granular tag dataflow for one block and streams every assert
// evaluation in deterministic order: program order, then thread ascending,
// then quantifier odometer order.
//
// Registers are per-thread and strongly updated; shared-memory stores merge
// into the standing byte tag; reads of shared memory in a barrier phase see
// the merge of the phase-entry state and the phase-final state, computed by
// iterating the phase to a fixpoint when it reads bytes it also writes.
// Tagged global loads stamp bytes by the base element they alias.
void analyze_block(const ir::Program& prog, std::int64_t bx, std::int64_t by,
                   TagTable& tags, ProvTable& prov,
                   const std::function<void(const Capture&)>& on_capture,
                   bool capture_bytes = false);

}  // namespace tilecheck
