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
#include <optional>
#include <string>
#include <vector>

#include "tilecheck/ast.hpp"
#include "tilecheck/dtype.hpp"
#include "tilecheck/intrinsics.hpp"
#include "tilecheck/layout.hpp"

namespace tilecheck::ir {

enum class Space { kGlobal, kShared, kRegister };

// One storage declaration. Views are separate decls that alias the full byte
// range of their root; `root` always names the decl that owns the bytes.
struct Decl {
  int id = -1;
  std::string name;
  Space space = Space::kRegister;
  Dtype dtype = Dtype::kU8;
  Layout layout = Layout::identity(1);
  int root = -1;
  bool is_out = false;

  std::int64_t bytes() const { return layout.byte_span(); }
};

// A reference to elements of a decl. Fewer indices than dims selects the
// row-major contiguous slice spanned by the remaining trailing dims; no
// indices selects the whole tile.
struct Accessor {
  int decl = -1;
  std::vector<ast::ExprPtr> indices;
};

// Tag function attached to a tensor or applied by a retag: coordinates bind
// positionally to coord_vars, then values evaluate to the tuple.
struct TagFn {
  std::vector<std::string> coord_vars;
  std::vector<ast::ExprPtr> values;
  int line = 0;
};

// One fully unrolled, per-thread executable statement. The same program runs
// in every block; block and thread only enter through blockIdx/threadIdx
// leaves in the expressions.
struct Instance {
  enum class Kind {
    kCopy,       // dst[indices] = value (loads, stores, arithmetic, selects)
    kMatmul,     // dst += a * b, warp-collective fragment step(s)
    kConcat,     // dst = one wide element gathered from four narrow ones
    kSync,       // barrier: ends the current phase
    kTagReset,   // restore a shared buffer's bytes to the bottom tag
    kRetag,      // strong re-stamp of a live tile's tags
    kAssert,     // quantified elementwise tag comparison
    kLocalInit,  // zero a register tile and reset its tags
  };

  Kind kind = Kind::kCopy;
  int stmt = -1;                       // source statement ordinal
  int line = 0;                        // source line
  std::vector<std::int64_t> instance;  // enclosing loop iteration values
  std::vector<ast::ExprPtr> guards;    // conjunction; empty means always
  int phase = 0;                       // barriers executed before this point

  // kCopy / kConcat / kMatmul destination, kLocalInit / kTagReset target
  // (decl only), kRetag target (decl only).
  Accessor dst;
  ast::ExprPtr value;             // kCopy right-hand side
  std::vector<Accessor> sources;  // kMatmul {a, b}; kConcat four words
  bool concat_hi = false;

  std::optional<TagFn> retag;  // kRetag

  // kAssert payload.
  ast::CmpOp assert_op = ast::CmpOp::kEq;
  ast::ExprPtr assert_left, assert_right;      // kTagOf expressions
  std::vector<std::string> quant_vars;         // innermost last
  std::vector<std::int64_t> quant_counts;
  int assert_id = -1;  // ordinal among assert statements, stable
};

struct Program {
  std::vector<Decl> decls;
  std::map<std::string, int> decl_by_name;
  std::vector<std::optional<TagFn>> tag_fns;  // indexed by decl id
  std::vector<Instance> code;

  std::int64_t grid_x = 1, grid_y = 1, threads = 1;
  int phases = 1;       // kSync count + 1
  int num_asserts = 0;  // distinct assert statements
  intrinsics::Mfma mfma;
  std::map<std::string, std::int64_t> consts;

  const Decl& decl_of(const Accessor& a) const {
    return decls[static_cast<std::size_t>(a.decl)];
  }
  std::int64_t blocks() const { return grid_x * grid_y; }
};

// Evaluation context for index and guard expressions. After lowering these
// contain only literals, threadIdx/blockIdx leaves, and the named extras
// bound here (assert quantifiers, tag coordinates).
struct EvalCtx {
  std::int64_t tid = 0, bx = 0, by = 0;
  const std::map<std::string, std::int64_t>* extra = nullptr;
};

// Evaluates a pure integer expression; comparisons yield 0/1. Division by
// zero, bad shifts, or unbound names throw kSafety.
std::int64_t eval_index(const ast::ExprPtr& e, const EvalCtx& ctx);

// True when every guard of the instance holds for this thread.
bool guards_hold(const Instance& inst, const EvalCtx& ctx);

// Element offset (in elements of the accessor's decl) for the given index
// values; checks every index against its dim extent and throws kSafety on a
// violation, naming the decl. Returns the linear element offset and, via
// out-params, the element count of the selected slice.
std::int64_t resolve_slice(const Program& prog, const Accessor& acc,
                           const EvalCtx& ctx, std::int64_t* slice_elems);

}  // namespace tilecheck::ir
