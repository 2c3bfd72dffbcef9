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

#include <map>
#include <string>

#include "tilecheck/diag.hpp"
#include "tilecheck/lower.hpp"

namespace tilecheck {

namespace {

// Bounds-checks one element load; loads always carry full indices.
void check_load(const ir::Program& prog, const ast::ExprPtr& e,
                const ir::EvalCtx& ctx) {
  const ir::Decl& d = prog.decls[prog.decl_by_name.at(e->name)];
  for (std::size_t i = 0; i < e->args.size(); ++i) {
    std::int64_t v = ir::eval_index(e->args[i], ctx);
    std::int64_t extent = d.layout.extent(i);
    if (v < 0 || v >= extent) {
      throw Error(ErrorKind::kSafety,
                  "index " + std::to_string(v) + " out of bounds for dim " +
                      std::to_string(i) + " of '" + d.name + "' (extent " +
                      std::to_string(extent) + ")");
    }
  }
}

// Walks a store's value expression the way execution would: every load is
// bounds-checked, and a select only checks the arm it takes.
void walk_value(const ir::Program& prog, const ast::ExprPtr& e,
                const ir::EvalCtx& ctx) {
  using ast::Expr;
  switch (e->kind) {
    case Expr::Kind::kSubscript:
      check_load(prog, e, ctx);
      return;
    case Expr::Kind::kCond:
      walk_value(prog,
                 ir::eval_index(e->args[0], ctx) != 0 ? e->args[1] : e->args[2],
                 ctx);
      return;
    default:
      for (const ast::ExprPtr& a : e->args) walk_value(prog, a, ctx);
  }
}

void check_instance(const ir::Program& prog, const ir::Instance& inst,
                    const ir::EvalCtx& ctx) {
  if (!ir::guards_hold(inst, ctx)) return;
  switch (inst.kind) {
    case ir::Instance::Kind::kSync:
    case ir::Instance::Kind::kTagReset:
    case ir::Instance::Kind::kLocalInit:
    case ir::Instance::Kind::kRetag:
      return;  // whole-tile effects; nothing indexes memory
    case ir::Instance::Kind::kAssert: {
      for (std::int64_t c : inst.quant_counts) {
        if (c == 0) return;  // empty quantifier domain
      }
      std::map<std::string, std::int64_t> extra;
      for (const std::string& v : inst.quant_vars) extra[v] = 0;
      ir::EvalCtx qctx = ctx;
      qctx.extra = &extra;
      // Odometer over the quantifier domain, innermost variable fastest.
      std::vector<std::int64_t> point(inst.quant_vars.size(), 0);
      for (;;) {
        for (std::size_t i = 0; i < point.size(); ++i) {
          extra[inst.quant_vars[i]] = point[i];
        }
        check_load(prog, inst.assert_left, qctx);
        check_load(prog, inst.assert_right, qctx);
        std::size_t i = point.size();
        while (i > 0) {
          --i;
          if (++point[i] < inst.quant_counts[i]) break;
          point[i] = 0;
          if (i == 0) return;
        }
        if (inst.quant_vars.empty()) return;
      }
    }
    case ir::Instance::Kind::kCopy:
    case ir::Instance::Kind::kMatmul:
    case ir::Instance::Kind::kConcat: {
      ir::resolve_slice(prog, inst.dst, ctx, nullptr);
      for (const ir::Accessor& src : inst.sources) {
        ir::resolve_slice(prog, src, ctx, nullptr);
      }
      if (inst.value) walk_value(prog, inst.value, ctx);
      return;
    }
  }
}

}  // namespace

void check_safety(const ir::Program& prog) {
  for (std::int64_t by = 0; by < prog.grid_y; ++by) {
    for (std::int64_t bx = 0; bx < prog.grid_x; ++bx) {
      for (std::int64_t tid = 0; tid < prog.threads; ++tid) {
        ir::EvalCtx ctx{tid, bx, by, nullptr};
        for (const ir::Instance& inst : prog.code) {
          try {
            check_instance(prog, inst, ctx);
          } catch (const Error& err) {
            if (err.kind() != ErrorKind::kSafety) throw;
            throw Error(ErrorKind::kSafety,
                        "line " + std::to_string(inst.line) + ": " +
                            err.what());
          }
        }
      }
    }
  }
}

}  // namespace tilecheck
