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

#include "tilecheck/lower.hpp"

#include <map>
#include <set>
#include <utility>

#include "tilecheck/diag.hpp"

namespace tilecheck {

namespace {

using ast::Expr;
using ast::ExprPtr;
using ast::StmtPtr;

[[noreturn]] void lower_error(int line, const std::string& msg) {
  throw Error(ErrorKind::kBind, "line " + std::to_string(line) + ": " + msg);
}

int count_nodes(const ExprPtr& e) {
  int n = 1;
  for (const ExprPtr& a : e->args) n += count_nodes(a);
  return n;
}

// Index expressions, loop bounds, and conditions must stay data-independent:
// no loads, no calls, no floats.
void require_pure_index(const ExprPtr& e, int line, const char* what) {
  switch (e->kind) {
    case Expr::Kind::kSubscript:
      lower_error(line, std::string(what) + " cannot load from memory");
    case Expr::Kind::kCall:
      lower_error(line, std::string(what) + " cannot call functions");
    case Expr::Kind::kFloatLit:
      lower_error(line, std::string(what) + " must be an integer expression");
    case Expr::Kind::kTagOf:
      lower_error(line, "tag() is only allowed inside assert statements");
    default:
      break;
  }
  for (const ExprPtr& a : e->args) require_pure_index(a, line, what);
}

enum class ValueType { kInt, kFloat };

class Lowerer {
 public:
  Lowerer(const BoundKernel& bk, const std::vector<ast::TagDeclStmt>& extra,
          const intrinsics::Mfma& desc, const LowerOptions& opts)
      : bk_(bk), extra_(extra), opts_(opts) {
    prog_.mfma = desc;
    prog_.consts = bk.consts;
    prog_.grid_x = bk.grid_x;
    prog_.grid_y = bk.grid_y;
    prog_.threads = bk.threads;
  }

  ir::Program run() {
    for (const BoundKernel::TensorInfo& t : bk_.tensors) {
      ir::Decl d;
      d.name = t.name;
      d.space = ir::Space::kGlobal;
      d.dtype = t.dtype;
      d.layout = Layout::contiguous(t.shape, dtype_bytes(t.dtype));
      d.is_out = t.is_out;
      add_decl(std::move(d), 0);
    }
    prog_.tag_fns.assign(prog_.decls.size(), std::nullopt);
    for (const ast::TagDeclStmt& t : extra_) attach_tag(t, 0);

    number(bk_.kernel.body);
    lower_block(bk_.kernel.body);

    prog_.phases = phase_ + 1;
    prog_.num_asserts = static_cast<int>(assert_ids_.size());
    return std::move(prog_);
  }

 private:
  // ---- declarations ----------------------------------------------------

  int add_decl(ir::Decl d, int line) {
    if (prog_.decl_by_name.count(d.name) || int_vars_.count(d.name)) {
      lower_error(line, "name '" + d.name + "' is already in use");
    }
    d.id = static_cast<int>(prog_.decls.size());
    if (d.root < 0) d.root = d.id;
    prog_.decl_by_name.emplace(d.name, d.id);
    prog_.decls.push_back(std::move(d));
    prog_.tag_fns.resize(prog_.decls.size());
    return prog_.decls.back().id;
  }

  const ir::Decl* find_decl(const std::string& name) const {
    auto it = prog_.decl_by_name.find(name);
    return it == prog_.decl_by_name.end() ? nullptr : &prog_.decls[it->second];
  }

  // ---- expression lowering ----------------------------------------------

  // Rewrites an expression: constants and index variables inline, scalar
  // names become element loads, loop variables are literals by the time we
  // get here (bound in int_vars_). Names in `symbolic_` stay as variables.
  ExprPtr lower_expr(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::kIntLit:
      case Expr::Kind::kFloatLit:
        return e;
      case Expr::Kind::kVar: {
        const std::string& n = e->name;
        if (n == "threadIdx.x" || n == "blockIdx.x" || n == "blockIdx.y") {
          return e;
        }
        if (symbolic_.count(n)) return e;
        if (auto c = bk_.consts.find(n); c != bk_.consts.end()) {
          return Expr::int_lit(c->second, e->line);
        }
        if (auto v = int_vars_.find(n); v != int_vars_.end()) {
          return v->second;
        }
        if (const ir::Decl* d = find_decl(n)) {
          if (d->layout.size() == 1) {
            return Expr::subscript(n, {Expr::int_lit(0)}, e->line);
          }
          lower_error(e->line, "tile '" + n + "' used as a scalar");
        }
        lower_error(e->line, "unknown name '" + n + "'");
      }
      case Expr::Kind::kSubscript: {
        const ir::Decl* d = find_decl(e->name);
        if (d == nullptr) {
          lower_error(e->line, "unknown tile '" + e->name + "'");
        }
        std::vector<ExprPtr> idx;
        idx.reserve(e->args.size());
        for (const ExprPtr& a : e->args) {
          ExprPtr lowered = lower_expr(a);
          require_pure_index(lowered, e->line, "an index");
          idx.push_back(std::move(lowered));
        }
        return Expr::subscript(e->name, std::move(idx), e->line);
      }
      case Expr::Kind::kCall: {
        if (e->name == "matmul" || e->name == "concat_lo" ||
            e->name == "concat_hi") {
          lower_error(e->line,
                      e->name + "() cannot be nested inside an expression");
        }
        if (e->name != "exp" && e->name != "max" && e->name != "min") {
          lower_error(e->line, "unknown function '" + e->name + "'");
        }
        std::size_t want = e->name == "exp" ? 1 : 2;
        if (e->args.size() != want) {
          lower_error(e->line, e->name + "() takes " + std::to_string(want) +
                                   " argument(s)");
        }
        std::vector<ExprPtr> args;
        for (const ExprPtr& a : e->args) args.push_back(lower_expr(a));
        return Expr::call(e->name, std::move(args), e->line);
      }
      case Expr::Kind::kBin:
        return Expr::binary(e->bin, lower_expr(e->args[0]),
                            lower_expr(e->args[1]), e->line);
      case Expr::Kind::kCmp:
        return Expr::compare(e->cmp, lower_expr(e->args[0]),
                             lower_expr(e->args[1]), e->line);
      case Expr::Kind::kCond: {
        ExprPtr c = lower_expr(e->args[0]);
        require_pure_index(c, e->line, "a selection condition");
        return Expr::cond(std::move(c), lower_expr(e->args[1]),
                          lower_expr(e->args[2]), e->line);
      }
      case Expr::Kind::kTagOf:
        lower_error(e->line, "tag() is only allowed inside assert statements");
    }
    lower_error(e->line, "bad expression");
  }

  ValueType classify(const ExprPtr& e, int line) const {
    switch (e->kind) {
      case Expr::Kind::kIntLit:
        return ValueType::kInt;
      case Expr::Kind::kFloatLit:
        return ValueType::kFloat;
      case Expr::Kind::kVar:
        return ValueType::kInt;  // builtins and symbolic names
      case Expr::Kind::kSubscript: {
        const ir::Decl& d = *find_decl(e->name);
        return dtype_is_float(d.dtype) ? ValueType::kFloat : ValueType::kInt;
      }
      case Expr::Kind::kCall:
        return ValueType::kFloat;
      case Expr::Kind::kBin: {
        ValueType a = classify(e->args[0], line);
        ValueType b = classify(e->args[1], line);
        return a == ValueType::kFloat || b == ValueType::kFloat
                   ? ValueType::kFloat
                   : ValueType::kInt;
      }
      case Expr::Kind::kCmp:
        return ValueType::kInt;
      case Expr::Kind::kCond: {
        ValueType a = classify(e->args[1], line);
        ValueType b = classify(e->args[2], line);
        return a == ValueType::kFloat || b == ValueType::kFloat
                   ? ValueType::kFloat
                   : ValueType::kInt;
      }
      default:
        lower_error(line, "bad value expression");
    }
  }

  // Float arithmetic must not touch opaque integer tiles, and integer
  // arithmetic may only load from tiles narrow enough for scalar math.
  // Whole-element raw copies are checked separately and allow any width.
  void check_value_loads(const ExprPtr& e, ValueType vt, int line) const {
    if (e->kind == Expr::Kind::kSubscript) {
      const ir::Decl& d = *find_decl(e->name);
      if (e->args.size() != d.layout.rank()) {
        lower_error(line, "load from '" + e->name + "' needs " +
                              std::to_string(d.layout.rank()) + " indices");
      }
      if (vt == ValueType::kFloat && !dtype_is_float(d.dtype)) {
        lower_error(line, "integer tile '" + e->name +
                              "' cannot join float arithmetic");
      }
      if (vt == ValueType::kInt && dtype_bytes(d.dtype) > 8) {
        lower_error(line, "wide element of '" + e->name +
                              "' can only be copied or concatenated");
      }
      return;  // indices were validated as pure already
    }
    for (const ExprPtr& a : e->args) check_value_loads(a, vt, line);
  }

  // An element-for-element move between integer tiles of the same type:
  // the one store form that carries opaque payloads of any width.
  bool is_raw_copy(const ir::Decl& dst, const ExprPtr& value) const {
    if (dtype_is_float(dst.dtype) || value->kind != Expr::Kind::kSubscript) {
      return false;
    }
    const ir::Decl* src = find_decl(value->name);
    return src != nullptr && src->dtype == dst.dtype;
  }

  // Validates a lowered store value against the destination element type and
  // emits the copy. `indices` are the lowered destination indices.
  void emit_copy(const ir::Decl& dst, std::vector<ExprPtr> indices,
                 ExprPtr value, const ast::Stmt& s) {
    if (is_raw_copy(dst, value)) {
      const ir::Decl& src = *find_decl(value->name);
      if (value->args.size() != src.layout.rank()) {
        lower_error(s.line, "load from '" + value->name + "' needs " +
                                std::to_string(src.layout.rank()) +
                                " indices");
      }
    } else {
      ValueType vt = classify(value, s.line);
      check_value_loads(value, vt, s.line);
      if (!dtype_is_float(dst.dtype)) {
        if (vt == ValueType::kFloat) {
          lower_error(s.line,
                      "float value stored to integer '" + dst.name + "'");
        }
        if (dtype_bytes(dst.dtype) > 8) {
          lower_error(s.line, "wide element of '" + dst.name +
                                  "' can only be copied from a matching tile");
        }
      }
    }
    ir::Instance& inst = emit(ir::Instance::Kind::kCopy, s);
    inst.dst.decl = dst.id;
    inst.dst.indices = std::move(indices);
    inst.value = std::move(value);
  }

  // ---- statement numbering and instance emission -------------------------

  void number(const std::vector<StmtPtr>& body) {
    for (const StmtPtr& s : body) {
      ordinal_.emplace(s.get(), next_ordinal_++);
      if (const auto* f = std::get_if<ast::ForallStmt>(&s->node)) {
        number(f->body);
      } else if (const auto* r = std::get_if<ast::RangeStmt>(&s->node)) {
        number(r->body);
      } else if (const auto* i = std::get_if<ast::IfStmt>(&s->node)) {
        number(i->body);
      }
    }
  }

  ir::Instance& emit(ir::Instance::Kind kind, const ast::Stmt& src) {
    if (static_cast<std::int64_t>(prog_.code.size()) >= opts_.max_instances) {
      throw Error(ErrorKind::kCap,
                  "unrolled program exceeds the instance cap of " +
                      std::to_string(opts_.max_instances));
    }
    ir::Instance inst;
    inst.kind = kind;
    inst.stmt = ordinal_.at(&src);
    inst.line = src.line;
    inst.instance = loop_values_;
    inst.guards = guards_;
    inst.phase = phase_;
    prog_.code.push_back(std::move(inst));
    return prog_.code.back();
  }

  // ---- statements ---------------------------------------------------------

  void lower_block(const std::vector<StmtPtr>& body) {
    for (const StmtPtr& s : body) lower_stmt(*s);
  }

  void lower_stmt(const ast::Stmt& s) {
    if (const auto* a = std::get_if<ast::AssignStmt>(&s.node)) {
      lower_assign(*a, s);
    } else if (const auto* al = std::get_if<ast::AllocStmt>(&s.node)) {
      lower_alloc(*al, s);
    } else if (const auto* v = std::get_if<ast::ViewStmt>(&s.node)) {
      lower_view(*v, s);
    } else if (const auto* f = std::get_if<ast::ForallStmt>(&s.node)) {
      std::int64_t lo = fold_bound(f->lo, s.line);
      std::int64_t hi = fold_bound(f->hi, s.line);
      run_loop(f->var, lo, hi, f->body, s.line);
    } else if (const auto* r = std::get_if<ast::RangeStmt>(&s.node)) {
      std::int64_t n = fold_bound(r->count, s.line);
      run_loop(r->var, 0, n, r->body, s.line);
    } else if (const auto* i = std::get_if<ast::IfStmt>(&s.node)) {
      ExprPtr cond = lower_expr(i->cond);
      require_pure_index(cond, s.line, "an if condition");
      guards_.push_back(std::move(cond));
      lower_block(i->body);
      guards_.pop_back();
    } else if (const auto* as = std::get_if<ast::AssertStmt>(&s.node)) {
      lower_assert(*as, s);
    } else if (const auto* t = std::get_if<ast::TagDeclStmt>(&s.node)) {
      if (!loop_values_.empty() || !guards_.empty()) {
        lower_error(s.line, "tag declarations must be top-level");
      }
      attach_tag(*t, s.line);
    } else if (const auto* rt = std::get_if<ast::RetagStmt>(&s.node)) {
      lower_retag(*rt, s);
    } else if (const auto* c = std::get_if<ast::CallStmt>(&s.node)) {
      lower_call(*c, s);
    }
  }

  std::int64_t fold_bound(const ExprPtr& e, int line) {
    ExprPtr lowered = lower_expr(e);
    try {
      return fold_int(lowered, {});
    } catch (const Error&) {
      lower_error(line, "loop bound must be a compile-time constant");
    }
  }

  void run_loop(const std::string& var, std::int64_t lo, std::int64_t hi,
                const std::vector<StmtPtr>& body, int line) {
    if (int_vars_.count(var) || prog_.decl_by_name.count(var) ||
        bk_.consts.count(var)) {
      lower_error(line, "loop variable '" + var + "' shadows another name");
    }
    for (std::int64_t v = lo; v < hi; ++v) {
      int_vars_[var] = Expr::int_lit(v, line);
      loop_values_.push_back(v);
      lower_block(body);
      loop_values_.pop_back();
    }
    int_vars_.erase(var);
  }

  void lower_alloc(const ast::AllocStmt& al, const ast::Stmt& s) {
    std::vector<std::int64_t> shape;
    for (const ExprPtr& dim : al.shape) {
      shape.push_back(fold_bound(dim, s.line));
      if (shape.back() <= 0) {
        lower_error(s.line, "allocation extent must be positive");
      }
    }
    if (al.shared && !loop_values_.empty()) {
      lower_error(s.line, "shared allocations must be top-level");
    }
    const ir::Decl* existing = find_decl(al.name);
    if (existing != nullptr) {
      Layout want = Layout::contiguous(shape, dtype_bytes(al.dtype));
      bool same_space =
          existing->space == (al.shared ? ir::Space::kShared
                                        : ir::Space::kRegister);
      if (existing->dtype != al.dtype || !(existing->layout == want) ||
          !same_space || existing->root != existing->id) {
        lower_error(s.line, "allocation '" + al.name +
                                "' conflicts with an earlier declaration");
      }
    } else {
      ir::Decl d;
      d.name = al.name;
      d.space = al.shared ? ir::Space::kShared : ir::Space::kRegister;
      d.dtype = al.dtype;
      d.layout = Layout::contiguous(shape, dtype_bytes(al.dtype));
      add_decl(std::move(d), s.line);
    }
    ir::Instance& inst = emit(ir::Instance::Kind::kLocalInit, s);
    inst.dst.decl = prog_.decl_by_name.at(al.name);
  }

  void lower_view(const ast::ViewStmt& v, const ast::Stmt& s) {
    const ir::Decl* base = find_decl(v.base);
    if (base == nullptr) {
      lower_error(s.line, "view of unknown tile '" + v.base + "'");
    }
    std::vector<std::int64_t> shape;
    for (const ExprPtr& dim : v.shape) shape.push_back(fold_bound(dim, s.line));
    Layout layout = Layout::contiguous(shape, dtype_bytes(v.dtype));
    if (!view_compatible(base->layout, layout)) {
      lower_error(s.line, "view '" + v.name + "' does not cover '" + v.base +
                              "' exactly");
    }
    int root = base->root;
    if (const ir::Decl* existing = find_decl(v.name)) {
      if (existing->root != root || existing->dtype != v.dtype ||
          !(existing->layout == layout)) {
        lower_error(s.line, "view '" + v.name +
                                "' conflicts with an earlier declaration");
      }
      return;  // pure aliasing; nothing to execute
    }
    ir::Decl d;
    d.name = v.name;
    d.space = base->space;
    d.dtype = v.dtype;
    d.layout = std::move(layout);
    d.root = root;
    d.is_out = base->is_out;
    add_decl(std::move(d), s.line);
  }

  void attach_tag(const ast::TagDeclStmt& t, int line) {
    const ir::Decl* d = find_decl(t.target);
    if (d == nullptr || d->space != ir::Space::kGlobal) {
      lower_error(line,
                  "tag declaration targets unknown tensor '" + t.target + "'");
    }
    if (prog_.tag_fns[d->id].has_value()) {
      lower_error(line, "duplicate tag declaration for '" + t.target + "'");
    }
    if (t.coord_vars.size() != d->layout.rank()) {
      lower_error(line, "tag declaration for '" + t.target + "' needs " +
                            std::to_string(d->layout.rank()) +
                            " coordinate variables");
    }
    ir::TagFn fn;
    fn.coord_vars = t.coord_vars;
    fn.line = line;
    std::set<std::string> coords(t.coord_vars.begin(), t.coord_vars.end());
    std::swap(symbolic_, coords);
    for (const ExprPtr& v : t.values) {
      ExprPtr lowered = lower_expr(v);
      require_pure_index(lowered, line, "a tag value");
      require_coord_only(lowered, line);
      fn.values.push_back(std::move(lowered));
    }
    std::swap(symbolic_, coords);
    prog_.tag_fns[d->id] = std::move(fn);
  }

  // Tensor tag functions may not depend on the executing thread.
  void require_coord_only(const ExprPtr& e, int line) const {
    if (e->kind == Expr::Kind::kVar && !symbolic_.count(e->name)) {
      lower_error(line, "tag declarations may only use coordinates and "
                        "constants, not '" +
                            e->name + "'");
    }
    for (const ExprPtr& a : e->args) require_coord_only(a, line);
  }

  void lower_retag(const ast::RetagStmt& rt, const ast::Stmt& s) {
    const ir::Decl* d = find_decl(rt.target);
    if (d == nullptr || d->space == ir::Space::kGlobal) {
      lower_error(s.line, "retag targets must be register or shared tiles");
    }
    if (rt.coord_vars.size() != d->layout.rank()) {
      lower_error(s.line, "retag of '" + rt.target + "' needs " +
                              std::to_string(d->layout.rank()) +
                              " coordinate variables");
    }
    ir::TagFn fn;
    fn.coord_vars = rt.coord_vars;
    fn.line = s.line;
    std::set<std::string> coords(rt.coord_vars.begin(), rt.coord_vars.end());
    for (const std::string& c : coords) {
      if (symbolic_.count(c)) {
        lower_error(s.line, "coordinate '" + c + "' shadows another name");
      }
    }
    symbolic_.insert(coords.begin(), coords.end());
    for (const ExprPtr& v : rt.values) {
      ExprPtr lowered = lower_expr(v);
      require_pure_index(lowered, s.line, "a tag value");
      fn.values.push_back(std::move(lowered));
    }
    for (const std::string& c : coords) symbolic_.erase(c);
    ir::Instance& inst = emit(ir::Instance::Kind::kRetag, s);
    inst.dst.decl = d->id;
    inst.retag = std::move(fn);
  }

  void lower_assert(const ast::AssertStmt& as, const ast::Stmt& s) {
    auto [it, fresh] = assert_ids_.emplace(&s, assert_ids_.size());
    (void)fresh;
    std::vector<std::string> qvars;
    std::vector<std::int64_t> qcounts;
    for (const ast::Quant& q : as.quants) {
      if (symbolic_.count(q.var)) {
        lower_error(s.line, "quantifier '" + q.var + "' shadows another name");
      }
      qvars.push_back(q.var);
      qcounts.push_back(fold_bound(q.count, s.line));
      if (qcounts.back() < 0) {
        lower_error(s.line, "quantifier range must be non-negative");
      }
      symbolic_.insert(q.var);
    }
    ExprPtr left = lower_tag_ref(as.left, s.line);
    ExprPtr right = lower_tag_ref(as.right, s.line);
    for (const std::string& q : qvars) symbolic_.erase(q);

    ir::Instance& inst = emit(ir::Instance::Kind::kAssert, s);
    inst.assert_op = as.op;
    inst.assert_left = std::move(left);
    inst.assert_right = std::move(right);
    inst.quant_vars = std::move(qvars);
    inst.quant_counts = std::move(qcounts);
    inst.assert_id = static_cast<int>(it->second);
  }

  ExprPtr lower_tag_ref(const ExprPtr& e, int line) {
    if (e->kind != Expr::Kind::kTagOf) {
      lower_error(line, "assert operands must be tag() references");
    }
    const ir::Decl* d = find_decl(e->name);
    if (d == nullptr) {
      lower_error(line, "tag() of unknown tile '" + e->name + "'");
    }
    if (e->args.size() != d->layout.rank()) {
      lower_error(line, "tag() of '" + e->name + "' needs " +
                            std::to_string(d->layout.rank()) + " indices");
    }
    std::vector<ExprPtr> idx;
    for (const ExprPtr& a : e->args) {
      ExprPtr lowered = lower_expr(a);
      require_pure_index(lowered, line, "an index");
      idx.push_back(std::move(lowered));
    }
    return Expr::tag_of(e->name, std::move(idx), line);
  }

  void lower_call(const ast::CallStmt& c, const ast::Stmt& s) {
    if (c.callee == "syncthreads") {
      if (!c.args.empty()) lower_error(s.line, "syncthreads() takes no arguments");
      emit(ir::Instance::Kind::kSync, s);
      ++phase_;
      return;
    }
    if (c.callee == "tag_reset") {
      if (c.args.size() != 1 || c.args[0]->kind != Expr::Kind::kVar) {
        lower_error(s.line, "tag_reset() takes one tile name");
      }
      const ir::Decl* d = find_decl(c.args[0]->name);
      if (d == nullptr || d->space == ir::Space::kGlobal) {
        lower_error(s.line,
                    "tag_reset() targets register or shared tiles only");
      }
      ir::Instance& inst = emit(ir::Instance::Kind::kTagReset, s);
      inst.dst.decl = d->id;
      return;
    }
    if (c.callee == "schedule_barrier") {
      if (!c.args.empty()) {
        lower_error(s.line, "schedule_barrier() takes no arguments");
      }
      return;  // scheduling annotation; no dataflow meaning
    }
    if (c.callee == "eager_materialize" || c.callee == "buffer_load") {
      if (c.args.size() != 1 || c.args[0]->kind != Expr::Kind::kVar ||
          find_decl(c.args[0]->name) == nullptr) {
        lower_error(s.line, c.callee + "() takes one tile name");
      }
      return;  // placement annotation; no dataflow meaning
    }
    if (c.callee == "grid") {
      lower_error(s.line, "grid() may only appear as the first statement");
    }
    lower_error(s.line, "unknown statement call '" + c.callee + "'");
  }

  // ---- assignment forms ---------------------------------------------------

  void lower_assign(const ast::AssignStmt& a, const ast::Stmt& s) {
    if (a.value->kind == Expr::Kind::kCall) {
      if (a.value->name == "matmul") {
        lower_matmul(a, s);
        return;
      }
      if (a.value->name == "concat_lo" || a.value->name == "concat_hi") {
        lower_concat(a, s);
        return;
      }
    }

    if (!a.indices.empty()) {
      store_to_tile(a, s);
      return;
    }

    // Scalar target: existing declaration, index variable, or fresh name.
    if (const ir::Decl* d = find_decl(a.target)) {
      if (d->layout.size() != 1) {
        lower_error(s.line,
                    "tile '" + a.target + "' needs indices to be written");
      }
      emit_scalar_store(d->id, a, s);
      return;
    }

    ExprPtr value = lower_expr(a.value);
    ValueType vt = classify(value, s.line);
    if (vt == ValueType::kInt) {
      bool pure = true;
      try {
        require_pure_index(value, s.line, "x");
      } catch (const Error&) {
        pure = false;
      }
      if (pure) {
        if (!guards_.empty()) {
          lower_error(s.line,
                      "index variable '" + a.target +
                          "' cannot be defined under an if; use a select");
        }
        if (count_nodes(value) > 4096) {
          throw Error(ErrorKind::kCap, "index expression for '" + a.target +
                                           "' grew beyond the size cap");
        }
        if (bk_.consts.count(a.target)) {
          lower_error(s.line, "cannot assign to constant '" + a.target + "'");
        }
        int_vars_[a.target] = std::move(value);
        return;
      }
    }

    // Materialize: a float scalar or a one-element copy of a wide element.
    Dtype dt = Dtype::kFP32;
    if (vt == ValueType::kInt) {
      if (value->kind != Expr::Kind::kSubscript) {
        lower_error(s.line, "integer value for '" + a.target +
                                "' must be a pure index or a single load");
      }
      dt = find_decl(value->name)->dtype;
    }
    ir::Decl d;
    d.name = a.target;
    d.space = ir::Space::kRegister;
    d.dtype = dt;
    d.layout = Layout::contiguous({1}, dtype_bytes(dt));
    int id = add_decl(std::move(d), s.line);
    std::vector<ExprPtr> idx;
    idx.push_back(Expr::int_lit(0, s.line));
    emit_copy(prog_.decls[id], std::move(idx), std::move(value), s);
  }

  void emit_scalar_store(int decl, const ast::AssignStmt& a,
                         const ast::Stmt& s) {
    std::vector<ExprPtr> idx;
    idx.push_back(Expr::int_lit(0, s.line));
    emit_copy(prog_.decls[decl], std::move(idx), lower_expr(a.value), s);
  }

  void store_to_tile(const ast::AssignStmt& a, const ast::Stmt& s) {
    const ir::Decl* d = find_decl(a.target);
    if (d == nullptr) {
      lower_error(s.line, "unknown tile '" + a.target + "'");
    }
    if (a.indices.size() != d->layout.rank()) {
      lower_error(s.line, "store to '" + a.target + "' needs " +
                              std::to_string(d->layout.rank()) + " indices");
    }
    require_writable(*d, s.line);
    std::vector<ExprPtr> idx;
    for (const ExprPtr& i : a.indices) {
      ExprPtr lowered = lower_expr(i);
      require_pure_index(lowered, s.line, "an index");
      idx.push_back(std::move(lowered));
    }
    emit_copy(*d, std::move(idx), lower_expr(a.value), s);
  }

  void require_writable(const ir::Decl& d, int line) {
    if (d.space == ir::Space::kGlobal) {
      const ir::Decl& root = prog_.decls[d.root];
      if (!root.is_out) {
        lower_error(line, "tensor '" + root.name +
                              "' is an input and cannot be written");
      }
    }
  }

  // Builds an accessor from a bare name or subscript expression.
  ir::Accessor to_accessor(const ExprPtr& e, int line, const char* what) {
    ir::Accessor acc;
    if (e->kind == Expr::Kind::kVar) {
      const ir::Decl* d = find_decl(e->name);
      if (d == nullptr) lower_error(line, std::string(what) + ": unknown tile");
      acc.decl = d->id;
      return acc;
    }
    if (e->kind == Expr::Kind::kSubscript) {
      const ir::Decl* d = find_decl(e->name);
      if (d == nullptr) lower_error(line, std::string(what) + ": unknown tile");
      if (e->args.size() > d->layout.rank()) {
        lower_error(line, std::string(what) + ": too many indices");
      }
      acc.decl = d->id;
      for (const ExprPtr& i : e->args) {
        ExprPtr lowered = lower_expr(i);
        require_pure_index(lowered, line, "an index");
        acc.indices.push_back(std::move(lowered));
      }
      return acc;
    }
    lower_error(line, std::string(what) + " must name tile elements");
  }

  std::int64_t slice_elems(const ir::Accessor& acc) const {
    const ir::Decl& d = prog_.decls[acc.decl];
    std::int64_t n = 1;
    for (std::size_t i = acc.indices.size(); i < d.layout.rank(); ++i) {
      n *= d.layout.extent(i);
    }
    return n;
  }

  void lower_matmul(const ast::AssignStmt& a, const ast::Stmt& s) {
    const intrinsics::Mfma& mm = prog_.mfma;
    if (prog_.threads % mm.lanes != 0) {
      lower_error(s.line, "matmul needs the block size to be a multiple of " +
                              std::to_string(mm.lanes));
    }
    if (a.value->args.size() != 3) {
      lower_error(s.line, "matmul(a, b, c) takes three operands");
    }
    // The destination must textually be the accumulator operand.
    ExprPtr target =
        a.indices.empty()
            ? Expr::var(a.target, s.line)
            : Expr::subscript(a.target, a.indices, s.line);
    if (ast::print(lower_value_shape(target)) !=
        ast::print(lower_value_shape(a.value->args[2]))) {
      lower_error(s.line, "matmul destination must be its third operand");
    }

    ir::Accessor dst = to_accessor(target, s.line, "matmul destination");
    ir::Accessor opa = to_accessor(a.value->args[0], s.line, "matmul operand");
    ir::Accessor opb = to_accessor(a.value->args[1], s.line, "matmul operand");

    const ir::Decl& dd = prog_.decls[dst.decl];
    const ir::Decl& da = prog_.decls[opa.decl];
    const ir::Decl& db = prog_.decls[opb.decl];
    require_writable(dd, s.line);
    if (dd.dtype != mm.c_dtype || slice_elems(dst) != mm.c_slots) {
      lower_error(s.line, "matmul accumulator must be " +
                              std::to_string(mm.c_slots) + " contiguous " +
                              std::string(dtype_name(mm.c_dtype)) +
                              " elements");
    }
    for (const ir::Decl* op : {&da, &db}) {
      if (op->dtype != mm.ab_dtype ||
          prog_.decls[op->root].space != ir::Space::kRegister) {
        lower_error(s.line, "matmul operands must be " +
                                std::string(dtype_name(mm.ab_dtype)) +
                                " register fragments");
      }
    }
    std::int64_t la = slice_elems(opa), lb = slice_elems(opb);
    if (la != lb || la % mm.a_slots != 0 || la <= 0) {
      lower_error(s.line,
                  "matmul operand fragments must pair up in multiples of " +
                      std::to_string(mm.a_slots) + " elements");
    }
    if (prog_.decls[dd.root].space != ir::Space::kRegister) {
      lower_error(s.line, "matmul accumulator must live in registers");
    }

    ir::Instance& inst = emit(ir::Instance::Kind::kMatmul, s);
    inst.dst = std::move(dst);
    inst.sources.push_back(std::move(opa));
    inst.sources.push_back(std::move(opb));
  }

  // Lowers just enough of an accessor expression to compare destination and
  // accumulator after loop-variable substitution.
  ExprPtr lower_value_shape(const ExprPtr& e) {
    if (e->kind == Expr::Kind::kSubscript) {
      std::vector<ExprPtr> idx;
      for (const ExprPtr& i : e->args) idx.push_back(lower_expr(i));
      return Expr::subscript(e->name, std::move(idx), e->line);
    }
    return e;
  }

  void lower_concat(const ast::AssignStmt& a, const ast::Stmt& s) {
    if (a.value->args.size() != 4) {
      lower_error(s.line, a.value->name + "() takes four element operands");
    }
    const ir::Decl* d = find_decl(a.target);
    if (d == nullptr || a.indices.size() != d->layout.rank()) {
      lower_error(s.line, "concat destination must be one tile element");
    }
    require_writable(*d, s.line);
    std::int64_t dst_w = dtype_bytes(d->dtype);
    ir::Instance& inst = emit(ir::Instance::Kind::kConcat, s);
    inst.dst.decl = d->id;
    for (const ExprPtr& i : a.indices) {
      ExprPtr lowered = lower_expr(i);
      require_pure_index(lowered, s.line, "an index");
      inst.dst.indices.push_back(std::move(lowered));
    }
    inst.concat_hi = a.value->name == "concat_hi";
    for (const ExprPtr& srce : a.value->args) {
      ir::Accessor src = to_accessor(srce, s.line, "concat operand");
      const ir::Decl& sd = prog_.decls[src.decl];
      if (src.indices.size() != sd.layout.rank()) {
        lower_error(s.line, "concat operands must be single elements");
      }
      if (dtype_is_float(sd.dtype) || dtype_is_float(d->dtype) ||
          dtype_bytes(sd.dtype) * 2 != dst_w) {
        lower_error(s.line, "concat gathers four elements of half the "
                            "destination width");
      }
      inst.sources.push_back(std::move(src));
    }
  }

  // ---- state ---------------------------------------------------------------

  const BoundKernel& bk_;
  const std::vector<ast::TagDeclStmt>& extra_;
  LowerOptions opts_;
  ir::Program prog_;

  std::map<std::string, ExprPtr> int_vars_;
  std::set<std::string> symbolic_;
  std::map<const ast::Stmt*, std::size_t> assert_ids_;
  std::map<const ast::Stmt*, int> ordinal_;
  int next_ordinal_ = 0;

  std::vector<std::int64_t> loop_values_;
  std::vector<ExprPtr> guards_;
  int phase_ = 0;
};

}  // namespace

ir::Program lower(const BoundKernel& bk,
                  const std::vector<ast::TagDeclStmt>& extra_tags,
                  const intrinsics::Mfma& desc, const LowerOptions& opts) {
  Lowerer l(bk, extra_tags, desc, opts);
  return l.run();
}

}  // namespace tilecheck
