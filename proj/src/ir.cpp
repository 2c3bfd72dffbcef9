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

#include "tilecheck/ir.hpp"

#include "tilecheck/diag.hpp"

namespace tilecheck::ir {

namespace {

[[noreturn]] void safety_error(const std::string& msg) {
  throw Error(ErrorKind::kSafety, msg);
}

}  // namespace

std::int64_t eval_index(const ast::ExprPtr& e, const EvalCtx& ctx) {
  using ast::Expr;
  switch (e->kind) {
    case Expr::Kind::kIntLit:
      return e->int_val;
    case Expr::Kind::kVar: {
      // The three builtins dominate; check them before the extras map.
      const std::string& n = e->name;
      if (n.size() >= 5) {
        if (n == "threadIdx.x") return ctx.tid;
        if (n == "blockIdx.x") return ctx.bx;
        if (n == "blockIdx.y") return ctx.by;
      }
      if (ctx.extra != nullptr) {
        auto it = ctx.extra->find(n);
        if (it != ctx.extra->end()) return it->second;
      }
      safety_error("unbound name '" + n + "' in an index expression");
    }
    case Expr::Kind::kBin: {
      std::int64_t a = eval_index(e->args[0], ctx);
      std::int64_t b = eval_index(e->args[1], ctx);
      switch (e->bin) {
        case ast::BinOp::kAdd: return a + b;
        case ast::BinOp::kSub: return a - b;
        case ast::BinOp::kMul: return a * b;
        case ast::BinOp::kDiv:
          if (b == 0) safety_error("division by zero in an index expression");
          return a / b;
        case ast::BinOp::kMod:
          if (b == 0) safety_error("modulo by zero in an index expression");
          return a % b;
        case ast::BinOp::kAnd: return a & b;
        case ast::BinOp::kOr: return a | b;
        case ast::BinOp::kXor: return a ^ b;
        case ast::BinOp::kShl:
          if (b < 0 || b > 62) safety_error("shift amount out of range");
          return a << b;
        case ast::BinOp::kShr:
          if (b < 0 || b > 62) safety_error("shift amount out of range");
          return a >> b;
      }
      safety_error("bad operator");
    }
    case Expr::Kind::kCmp: {
      std::int64_t a = eval_index(e->args[0], ctx);
      std::int64_t b = eval_index(e->args[1], ctx);
      switch (e->cmp) {
        case ast::CmpOp::kLt: return a < b;
        case ast::CmpOp::kLe: return a <= b;
        case ast::CmpOp::kGt: return a > b;
        case ast::CmpOp::kGe: return a >= b;
        case ast::CmpOp::kEq: return a == b;
        case ast::CmpOp::kNe: return a != b;
      }
      safety_error("bad comparison");
    }
    case Expr::Kind::kCond:
      return eval_index(e->args[0], ctx) != 0 ? eval_index(e->args[1], ctx)
                                              : eval_index(e->args[2], ctx);
    case Expr::Kind::kFloatLit:
    case Expr::Kind::kCall:
    case Expr::Kind::kSubscript:
    case Expr::Kind::kTagOf:
      break;
  }
  safety_error("expression is not a pure index");
}

bool guards_hold(const Instance& inst, const EvalCtx& ctx) {
  for (const ast::ExprPtr& g : inst.guards) {
    if (eval_index(g, ctx) == 0) return false;
  }
  return true;
}

std::int64_t resolve_slice(const Program& prog, const Accessor& acc,
                           const EvalCtx& ctx, std::int64_t* slice_elems) {
  const Decl& d = prog.decl_of(acc);
  const std::size_t rank = d.layout.rank();
  const std::size_t given = acc.indices.size();

  std::vector<std::int64_t> coords(rank, 0);
  for (std::size_t i = 0; i < given; ++i) {
    std::int64_t v = eval_index(acc.indices[i], ctx);
    std::int64_t extent = d.layout.extent(i);
    if (v < 0 || v >= extent) {
      safety_error("index " + std::to_string(v) + " out of bounds for dim " +
                   std::to_string(i) + " of '" + d.name + "' (extent " +
                   std::to_string(extent) + ")");
    }
    coords[i] = v;
  }

  std::int64_t elems = 1;
  for (std::size_t i = given; i < rank; ++i) elems *= d.layout.extent(i);
  if (slice_elems != nullptr) *slice_elems = elems;
  return d.layout.eval(coords);
}

}  // namespace tilecheck::ir
