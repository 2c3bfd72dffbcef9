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
#include <map>
#include <string>
#include <vector>

#include "tilecheck/ir.hpp"
#include "tilecheck/tags.hpp"

namespace tilecheck::interp {

// A dense host tensor: the concrete value of one global parameter. The byte
// buffer is little-endian, row-major, with no padding between elements.
struct TensorValue {
  Dtype dtype = Dtype::kFP32;
  std::vector<std::int64_t> shape;
  std::vector<std::uint8_t> bytes;

  static TensorValue zeros(Dtype dtype, std::vector<std::int64_t> shape);

  std::int64_t elems() const;

  // Scalar access by linear element index, for the arithmetic element types
  // (fp32, bf16, fp8, i32). Narrowing stores round to nearest-even. The
  // opaque u* families have no scalar value and must be touched as bytes.
  double get(std::int64_t elem) const;
  void set(std::int64_t elem, double v);
};

// Work moved by one launch, accumulated over every block. Bytes count each
// executed element access at its element width (loads and stores alike);
// register traffic, assert evaluation, and allocation zero-fill are free.
// statement_instances counts every unrolled statement once per block.
struct CostCounters {
  std::int64_t global_bytes = 0;
  std::int64_t shared_bytes = 0;
  std::int64_t barriers = 0;
  std::int64_t statement_instances = 0;

  bool operator==(const CostCounters&) const = default;
};

struct RunResult {
  std::map<std::string, TensorValue> outputs;  // the `out` tensors
  CostCounters cost;
};

// Executes the lowered program concretely on the host. Blocks run in
// ascending (y, x) order; within a block every statement instance executes
// for all threads in ascending id before the next instance begins, so two
// runs with identical inputs are byte-identical. Matmul statements execute
// the intrinsic descriptor literally, one lane group at a time, gathering
// operand fragments by the lane maps and accumulating in fp32 ascending
// along the contraction; bf16/fp8 stores round to nearest-even; float
// arithmetic is IEEE single precision.
//
// Inputs must cover every input tensor with matching element type and shape;
// `out` tensors may optionally be seeded and are zero otherwise. Throws
// kConfig on a manifest mismatch and kSafety on a runtime bounds violation.
RunResult run(const ir::Program& prog,
              const std::map<std::string, TensorValue>& inputs);

// One entry of the dynamic tag trace: a byte store carrying the concrete
// tag of the value written, a tag re-stamp, or an operand byte read at an
// assert or matmul site. Register byte offsets are lane-resolved
// (tid * root_bytes + byte); shared and global offsets index the root span.
struct TagRecord {
  enum class Op : std::uint8_t { kStore, kRetag, kRead };

  Op op = Op::kStore;
  std::int32_t code_index = -1;
  std::int64_t block = 0;   // by * grid_x + bx
  std::int64_t thread = 0;  // tid within the block
  std::int32_t root = -1;   // root decl owning the byte
  std::int64_t offset = 0;
  Tag tag = kTagBottom;
};

// One executed assert comparison with the tags the run concretely produced.
// Mirrors the static engine's capture shape so the two streams can be
// compared site by site and byte by byte.
struct AssertCapture {
  std::int32_t code_index = -1;
  std::int64_t block = 0;
  std::int64_t thread = 0;
  std::vector<std::int64_t> qpoint;
  std::vector<std::int64_t> left_coord, right_coord;
  Tag left_tag = kTagBottom, right_tag = kTagBottom;
  std::vector<Tag> left_byte_tags, right_byte_tags;
  // An operand byte's buffer was stamped with two distinct tuple tags since
  // its last reset, so its content is store-order dependent.
  bool left_unstable = false, right_unstable = false;
  // The barrier phase enclosing this comparison re-stamped a shared byte it
  // also read: concrete evidence of a missing barrier between the two.
  bool phase_hazard = false;
};

struct DynamicTagLog {
  std::vector<TagRecord> records;
  bool truncated = false;  // the record cap was reached
  std::vector<AssertCapture> captures;
};

struct DynOptions {
  // Collect an AssertCapture for every executed comparison (optionally
  // narrowed by capture_filter, which sees the code index and thread).
  bool captures = true;
  std::function<bool(std::int32_t code_index, std::int64_t thread)>
      capture_filter;
  // Trace stores, re-stamps, and assert/matmul operand reads into `records`
  // (bounded by max_records; the tail is dropped and `truncated` set).
  bool store_log = false;
  std::int64_t max_records = std::int64_t{1} << 20;
  // Restrict execution to one linear block index (-1 runs the whole grid).
  std::int64_t only_block = -1;
};

struct DynamicRunResult {
  std::map<std::string, TensorValue> outputs;
  CostCounters cost;
  TagTable tags;  // interner for every tag in the log
  DynamicTagLog log;
};

// run(), plus a concrete tag carried on every tracked byte: loads from
// tagged tensors stamp the declared tag of the element each byte belongs
// to, raw element moves carry byte tags verbatim, computed values merge the
// tags of everything they load (a select takes its taken arm only), and
// resets restore bottom. Stores onto a shared byte additionally fold into a
// per-byte shadow merge so that a buffer stamped with two distinct tuples
// since its last reset marks readers unstable.
DynamicRunResult run_with_tags(const ir::Program& prog,
                               const std::map<std::string, TensorValue>& inputs,
                               const DynOptions& opts = {});

}  // namespace tilecheck::interp
