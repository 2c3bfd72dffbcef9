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

#include "tilecheck/bind.hpp"

#include <utility>

#include "tilecheck/diag.hpp"

namespace tilecheck {

namespace {

[[noreturn]] void bind_error(const std::string& msg) {
  throw Error(ErrorKind::kBind, msg);
}

}  // namespace

std::int64_t fold_int(const ast::ExprPtr& e,
                      const std::map<std::string, std::int64_t>& env) {
  using ast::Expr;
  switch (e->kind) {
    case Expr::Kind::kIntLit:
      return e->int_val;
    case Expr::Kind::kFloatLit:
      bind_error("float literal in an integer context");
    case Expr::Kind::kVar: {
      auto it = env.find(e->name);
      if (it == env.end()) bind_error("unbound name '" + e->name + "'");
      return it->second;
    }
    case Expr::Kind::kBin: {
      std::int64_t a = fold_int(e->args[0], env);
      std::int64_t b = fold_int(e->args[1], env);
      switch (e->bin) {
        case ast::BinOp::kAdd: return a + b;
        case ast::BinOp::kSub: return a - b;
        case ast::BinOp::kMul: return a * b;
        case ast::BinOp::kDiv:
          if (b == 0) bind_error("division by zero");
          return a / b;
        case ast::BinOp::kMod:
          if (b == 0) bind_error("modulo by zero");
          return a % b;
        case ast::BinOp::kAnd: return a & b;
        case ast::BinOp::kOr: return a | b;
        case ast::BinOp::kXor: return a ^ b;
        case ast::BinOp::kShl:
          if (b < 0 || b > 62) bind_error("shift amount out of range");
          return a << b;
        case ast::BinOp::kShr:
          if (b < 0 || b > 62) bind_error("shift amount out of range");
          return a >> b;
      }
      bind_error("bad operator");
    }
    case Expr::Kind::kCmp: {
      std::int64_t a = fold_int(e->args[0], env);
      std::int64_t b = fold_int(e->args[1], env);
      switch (e->cmp) {
        case ast::CmpOp::kLt: return a < b;
        case ast::CmpOp::kLe: return a <= b;
        case ast::CmpOp::kGt: return a > b;
        case ast::CmpOp::kGe: return a >= b;
        case ast::CmpOp::kEq: return a == b;
        case ast::CmpOp::kNe: return a != b;
      }
      bind_error("bad comparison");
    }
    case Expr::Kind::kCond:
      return fold_int(e->args[0], env) != 0 ? fold_int(e->args[1], env)
                                            : fold_int(e->args[2], env);
    case Expr::Kind::kCall:
    case Expr::Kind::kSubscript:
    case Expr::Kind::kTagOf:
      break;
  }
  bind_error("expression is not a compile-time integer");
}

const BoundKernel::TensorInfo* BoundKernel::find_tensor(
    const std::string& name) const {
  for (const TensorInfo& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

BoundKernel bind(ast::Kernel kernel,
                 const std::map<std::string, std::int64_t>& bindings) {
  BoundKernel out;

  for (const ast::Param& p : kernel.params) {
    if (!p.is_const()) continue;
    auto it = bindings.find(p.name);
    if (it == bindings.end()) {
      bind_error("missing binding for constant '" + p.name + "'");
    }
    out.consts.emplace(p.name, it->second);
  }
  for (const auto& [name, value] : bindings) {
    if (!out.consts.count(name)) {
      bind_error("unknown constant '" + name + "'");
    }
    (void)value;
  }

  for (const ast::Param& p : kernel.params) {
    if (p.is_const()) continue;
    BoundKernel::TensorInfo t;
    t.name = p.name;
    t.dtype = p.tensor->dtype;
    t.is_out = p.tensor->is_out;
    for (const ast::ExprPtr& dim : p.tensor->shape) {
      std::int64_t extent = fold_int(dim, out.consts);
      if (extent <= 0) {
        bind_error("tensor '" + p.name + "' has non-positive extent " +
                   std::to_string(extent));
      }
      t.shape.push_back(extent);
    }
    out.tensors.push_back(std::move(t));
  }

  out.grid_x = fold_int(kernel.grid_x, out.consts);
  out.grid_y = fold_int(kernel.grid_y, out.consts);
  if (out.grid_x < 1 || out.grid_y < 1) {
    bind_error("grid must be at least 1x1, got " + std::to_string(out.grid_x) +
               "x" + std::to_string(out.grid_y));
  }

  auto threads = out.consts.find("threads");
  if (threads == out.consts.end()) {
    bind_error("kernels must declare a 'threads' constant (block size)");
  }
  out.threads = threads->second;
  if (out.threads < 1) bind_error("'threads' must be positive");

  out.kernel = std::move(kernel);
  return out;
}

}  // namespace tilecheck
