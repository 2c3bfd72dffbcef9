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
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tilecheck/dtype.hpp"

namespace tilecheck::ast {

enum class BinOp { kAdd, kSub, kMul, kDiv, kMod, kAnd, kOr, kXor, kShl, kShr };
enum class CmpOp { kLt, kLe, kGt, kGe, kEq, kNe };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Expressions are immutable once built; loop unrolling substitutes into them
// structurally, sharing untouched subtrees.
struct Expr {
  enum class Kind {
    kIntLit,
    kFloatLit,
    kVar,        // named scalar: params, loop vars, tid/blockIdx.x/...
    kBin,        // args = {lhs, rhs}
    kCmp,        // args = {lhs, rhs}; only valid as a condition
    kCond,       // args = {cond, then, else}; prints "then if cond else else"
    kCall,       // name(args): float math, matmul, concat_lo/hi
    kSubscript,  // name[args]
    kTagOf,      // tag(name[args]); only valid inside assert statements
  };

  Kind kind;
  int line = 0;
  std::int64_t int_val = 0;
  double float_val = 0.0;
  std::string name;
  BinOp bin = BinOp::kAdd;
  CmpOp cmp = CmpOp::kEq;
  std::vector<ExprPtr> args;

  static ExprPtr int_lit(std::int64_t v, int line = 0);
  static ExprPtr float_lit(double v, int line = 0);
  static ExprPtr var(std::string name, int line = 0);
  static ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs, int line = 0);
  static ExprPtr compare(CmpOp op, ExprPtr lhs, ExprPtr rhs, int line = 0);
  static ExprPtr cond(ExprPtr c, ExprPtr t, ExprPtr e, int line = 0);
  static ExprPtr call(std::string name, std::vector<ExprPtr> args,
                      int line = 0);
  static ExprPtr subscript(std::string name, std::vector<ExprPtr> indices,
                           int line = 0);
  static ExprPtr tag_of(std::string name, std::vector<ExprPtr> indices,
                        int line = 0);
};

// Replaces every occurrence of the named variable; unchanged subtrees are
// returned as-is (shared).
ExprPtr substitute(const ExprPtr& e, const std::string& var,
                   const ExprPtr& replacement);

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

// One trailing "for v in range(n)" quantifier of an assert statement.
struct Quant {
  std::string var;
  ExprPtr count;
};

struct AssignStmt {
  std::string target;
  std::vector<ExprPtr> indices;  // empty for scalar targets
  ExprPtr value;
};

struct AllocStmt {  // make_shared / make_local
  std::string name;
  bool shared = false;
  std::vector<ExprPtr> shape;
  Dtype dtype = Dtype::kU8;
};

struct ViewStmt {  // name = base.view((shape), dtype)
  std::string name;
  std::string base;
  std::vector<ExprPtr> shape;
  Dtype dtype = Dtype::kU8;
};

struct ForallStmt {  // forall var in [lo, hi): parallel across the range
  std::string var;
  ExprPtr lo, hi;
  std::vector<StmtPtr> body;
};

struct RangeStmt {  // for var in range(count): sequential
  std::string var;
  ExprPtr count;
  std::vector<StmtPtr> body;
};

struct IfStmt {  // no else branch
  ExprPtr cond;
  std::vector<StmtPtr> body;
};

struct AssertStmt {  // assert tag(a[..]) OP tag(b[..]) [for v in range(n)]*
  CmpOp op = CmpOp::kEq;
  ExprPtr left, right;
  std::vector<Quant> quants;
};

struct TagDeclStmt {  // name = target[v1, ...] -> (e1, ...), target a tensor
  std::string name;
  std::string target;
  std::vector<std::string> coord_vars;
  std::vector<ExprPtr> values;
};

// Same shape as TagDeclStmt, but the target is a register or shared tile and
// the statement executes where it stands: each thread re-stamps the bytes it
// owns. Value expressions may use loop and thread variables.
struct RetagStmt {
  std::string name;
  std::string target;
  std::vector<std::string> coord_vars;
  std::vector<ExprPtr> values;
};

struct CallStmt {  // syncthreads(), tag_reset(x), schedule_barrier(), ...
  std::string callee;
  std::vector<ExprPtr> args;
};

struct Stmt {
  int line = 0;
  std::variant<AssignStmt, AllocStmt, ViewStmt, ForallStmt, RangeStmt, IfStmt,
               AssertStmt, TagDeclStmt, RetagStmt, CallStmt>
      node;
};

struct TensorParam {
  std::vector<ExprPtr> shape;
  Dtype dtype = Dtype::kU8;
  bool is_out = false;
};

struct Param {
  std::string name;
  int line = 0;
  // Parameters are either compile-time integer constants or tensors.
  std::optional<TensorParam> tensor;

  bool is_const() const { return !tensor.has_value(); }
};

struct Kernel {
  std::string name;
  int line = 0;
  std::vector<Param> params;
  ExprPtr grid_x, grid_y;
  std::vector<StmtPtr> body;
};

// Canonical source form: 4-space indents, minimal parentheses, one statement
// per line. parse(print(k)) reproduces k, and printing is idempotent.
std::string print(const Kernel& k);
std::string print(const ExprPtr& e);

// Recursive statement counts, used to sanity-check parsed kernels.
int count_tag_decls(const Kernel& k);
int count_asserts(const Kernel& k);

}  // namespace tilecheck::ast
