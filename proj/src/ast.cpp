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

#include "tilecheck/ast.hpp"

#include <iomanip>
#include <sstream>

namespace tilecheck::ast {

namespace {

std::shared_ptr<Expr> node(Expr::Kind kind, int line) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->line = line;
  return e;
}

}  // namespace

ExprPtr Expr::int_lit(std::int64_t v, int line) {
  auto e = node(Kind::kIntLit, line);
  e->int_val = v;
  return e;
}

ExprPtr Expr::float_lit(double v, int line) {
  auto e = node(Kind::kFloatLit, line);
  e->float_val = v;
  return e;
}

ExprPtr Expr::var(std::string name, int line) {
  auto e = node(Kind::kVar, line);
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr lhs, ExprPtr rhs, int line) {
  auto e = node(Kind::kBin, line);
  e->bin = op;
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr Expr::compare(CmpOp op, ExprPtr lhs, ExprPtr rhs, int line) {
  auto e = node(Kind::kCmp, line);
  e->cmp = op;
  e->args = {std::move(lhs), std::move(rhs)};
  return e;
}

ExprPtr Expr::cond(ExprPtr c, ExprPtr t, ExprPtr f, int line) {
  auto e = node(Kind::kCond, line);
  e->args = {std::move(c), std::move(t), std::move(f)};
  return e;
}

ExprPtr Expr::call(std::string name, std::vector<ExprPtr> args, int line) {
  auto e = node(Kind::kCall, line);
  e->name = std::move(name);
  e->args = std::move(args);
  return e;
}

ExprPtr Expr::subscript(std::string name, std::vector<ExprPtr> indices,
                        int line) {
  auto e = node(Kind::kSubscript, line);
  e->name = std::move(name);
  e->args = std::move(indices);
  return e;
}

ExprPtr Expr::tag_of(std::string name, std::vector<ExprPtr> indices,
                     int line) {
  auto e = node(Kind::kTagOf, line);
  e->name = std::move(name);
  e->args = std::move(indices);
  return e;
}

ExprPtr substitute(const ExprPtr& e, const std::string& var,
                   const ExprPtr& replacement) {
  switch (e->kind) {
    case Expr::Kind::kIntLit:
    case Expr::Kind::kFloatLit:
      return e;
    case Expr::Kind::kVar:
      return e->name == var ? replacement : e;
    default: {
      bool changed = false;
      std::vector<ExprPtr> args;
      args.reserve(e->args.size());
      for (const ExprPtr& a : e->args) {
        ExprPtr s = substitute(a, var, replacement);
        changed |= s != a;
        args.push_back(std::move(s));
      }
      if (!changed) return e;
      auto copy = std::make_shared<Expr>(*e);
      copy->args = std::move(args);
      return copy;
    }
  }
}

namespace {

const char* bin_str(BinOp op) {
  switch (op) {
    case BinOp::kAdd: return "+";
    case BinOp::kSub: return "-";
    case BinOp::kMul: return "*";
    case BinOp::kDiv: return "/";
    case BinOp::kMod: return "%";
    case BinOp::kAnd: return "&";
    case BinOp::kOr: return "|";
    case BinOp::kXor: return "^";
    case BinOp::kShl: return "<<";
    case BinOp::kShr: return ">>";
  }
  return "?";
}

const char* cmp_str(CmpOp op) {
  switch (op) {
    case CmpOp::kLt: return "<";
    case CmpOp::kLe: return "<=";
    case CmpOp::kGt: return ">";
    case CmpOp::kGe: return ">=";
    case CmpOp::kEq: return "==";
    case CmpOp::kNe: return "!=";
  }
  return "?";
}

// Binding strength; higher binds tighter. Conditional expressions are the
// loosest, primaries the tightest.
int prec(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kCond:
      return 0;
    case Expr::Kind::kBin:
      switch (e.bin) {
        case BinOp::kOr: return 1;
        case BinOp::kXor: return 2;
        case BinOp::kAnd: return 3;
        case BinOp::kShl:
        case BinOp::kShr: return 4;
        case BinOp::kAdd:
        case BinOp::kSub: return 5;
        default: return 6;
      }
    case Expr::Kind::kCmp:
      return 0;  // only ever printed as a condition
    default:
      return 7;
  }
}

std::string float_str(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  std::string s = os.str();
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) {
    s += ".0";
  }
  return s;
}

void print_expr(std::ostringstream& os, const ExprPtr& e);

void print_wrapped(std::ostringstream& os, const ExprPtr& e, bool wrap) {
  if (wrap) os << "(";
  print_expr(os, e);
  if (wrap) os << ")";
}

void print_list(std::ostringstream& os, const std::vector<ExprPtr>& list) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) os << ", ";
    print_expr(os, list[i]);
  }
}

void print_expr(std::ostringstream& os, const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::kIntLit:
      os << e->int_val;
      break;
    case Expr::Kind::kFloatLit:
      os << float_str(e->float_val);
      break;
    case Expr::Kind::kVar:
      os << e->name;
      break;
    case Expr::Kind::kBin: {
      int p = prec(*e);
      print_wrapped(os, e->args[0], prec(*e->args[0]) < p);
      os << " " << bin_str(e->bin) << " ";
      print_wrapped(os, e->args[1], prec(*e->args[1]) <= p);
      break;
    }
    case Expr::Kind::kCmp:
      print_wrapped(os, e->args[0], prec(*e->args[0]) == 0);
      os << " " << cmp_str(e->cmp) << " ";
      print_wrapped(os, e->args[1], prec(*e->args[1]) == 0);
      break;
    case Expr::Kind::kCond:
      print_wrapped(os, e->args[1], prec(*e->args[1]) == 0);
      os << " if ";
      print_expr(os, e->args[0]);
      os << " else ";
      print_expr(os, e->args[2]);
      break;
    case Expr::Kind::kCall:
      os << e->name << "(";
      print_list(os, e->args);
      os << ")";
      break;
    case Expr::Kind::kSubscript:
      os << e->name << "[";
      print_list(os, e->args);
      os << "]";
      break;
    case Expr::Kind::kTagOf:
      os << "tag(" << e->name << "[";
      print_list(os, e->args);
      os << "])";
      break;
  }
}

// Shape tuples keep Python's one-element form: "(16,)".
void print_tuple(std::ostringstream& os, const std::vector<ExprPtr>& list) {
  os << "(";
  print_list(os, list);
  if (list.size() == 1) os << ",";
  os << ")";
}

void print_stmt(std::ostringstream& os, const StmtPtr& s, int depth);

bool inline_printable(const Stmt& s) {
  return std::holds_alternative<AssignStmt>(s.node) ||
         std::holds_alternative<CallStmt>(s.node);
}

void print_stmt(std::ostringstream& os, const StmtPtr& s, int depth) {
  if (depth >= 0) os << std::string(static_cast<std::size_t>(depth) * 4, ' ');
  const Stmt& st = *s;
  if (const auto* a = std::get_if<AssignStmt>(&st.node)) {
    os << a->target;
    if (!a->indices.empty()) {
      os << "[";
      print_list(os, a->indices);
      os << "]";
    }
    os << " = ";
    print_expr(os, a->value);
  } else if (const auto* al = std::get_if<AllocStmt>(&st.node)) {
    os << al->name << " = " << (al->shared ? "make_shared" : "make_local")
       << "(";
    print_tuple(os, al->shape);
    os << ", " << dtype_name(al->dtype) << ")";
  } else if (const auto* v = std::get_if<ViewStmt>(&st.node)) {
    os << v->name << " = " << v->base << ".view(";
    print_tuple(os, v->shape);
    os << ", " << dtype_name(v->dtype) << ")";
  } else if (const auto* f = std::get_if<ForallStmt>(&st.node)) {
    os << "forall " << f->var << " in [";
    print_expr(os, f->lo);
    os << ", ";
    print_expr(os, f->hi);
    os << "):";
    if (f->body.size() == 1 && inline_printable(*f->body[0])) {
      os << " ";
      print_stmt(os, f->body[0], -1);
    } else {
      for (const StmtPtr& b : f->body) {
        os << "\n";
        print_stmt(os, b, depth + 1);
      }
    }
  } else if (const auto* r = std::get_if<RangeStmt>(&st.node)) {
    os << "for " << r->var << " in range(";
    print_expr(os, r->count);
    os << "):";
    if (r->body.size() == 1 && inline_printable(*r->body[0])) {
      os << " ";
      print_stmt(os, r->body[0], -1);
    } else {
      for (const StmtPtr& b : r->body) {
        os << "\n";
        print_stmt(os, b, depth + 1);
      }
    }
  } else if (const auto* i = std::get_if<IfStmt>(&st.node)) {
    os << "if ";
    print_expr(os, i->cond);
    os << ":";
    if (i->body.size() == 1 && inline_printable(*i->body[0])) {
      os << " ";
      print_stmt(os, i->body[0], -1);
    } else {
      for (const StmtPtr& b : i->body) {
        os << "\n";
        print_stmt(os, b, depth + 1);
      }
    }
  } else if (const auto* as = std::get_if<AssertStmt>(&st.node)) {
    os << "assert ";
    print_expr(os, as->left);
    os << " " << cmp_str(as->op) << " ";
    print_expr(os, as->right);
    for (const Quant& q : as->quants) {
      os << " for " << q.var << " in range(";
      print_expr(os, q.count);
      os << ")";
    }
  } else if (const auto* t = std::get_if<TagDeclStmt>(&st.node)) {
    os << t->name << " = " << t->target << "[";
    for (std::size_t k = 0; k < t->coord_vars.size(); ++k) {
      if (k) os << ", ";
      os << t->coord_vars[k];
    }
    os << "] -> ";
    print_tuple(os, t->values);
  } else if (const auto* rt = std::get_if<RetagStmt>(&st.node)) {
    os << rt->name << " = " << rt->target << "[";
    for (std::size_t k = 0; k < rt->coord_vars.size(); ++k) {
      if (k) os << ", ";
      os << rt->coord_vars[k];
    }
    os << "] -> ";
    print_tuple(os, rt->values);
  } else if (const auto* c = std::get_if<CallStmt>(&st.node)) {
    os << c->callee << "(";
    print_list(os, c->args);
    os << ")";
  }
}

}  // namespace

std::string print(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string print(const Kernel& k) {
  std::ostringstream os;
  os << "def " << k.name << "(";
  for (std::size_t i = 0; i < k.params.size(); ++i) {
    if (i) os << ", ";
    const Param& p = k.params[i];
    os << p.name << ": ";
    if (p.is_const()) {
      os << "const";
    } else {
      os << "Tensor(";
      print_tuple(os, p.tensor->shape);
      os << ", " << dtype_name(p.tensor->dtype);
      if (p.tensor->is_out) os << ", out";
      os << ")";
    }
  }
  os << "):\n";
  os << "    grid(";
  print_expr(os, k.grid_x);
  os << ", ";
  print_expr(os, k.grid_y);
  os << ")\n";
  for (const StmtPtr& s : k.body) {
    print_stmt(os, s, 1);
    os << "\n";
  }
  return os.str();
}

namespace {

void count_nodes(const std::vector<StmtPtr>& body, int* tag_decls,
                 int* asserts) {
  for (const StmtPtr& s : body) {
    if (std::holds_alternative<TagDeclStmt>(s->node)) ++*tag_decls;
    if (std::holds_alternative<AssertStmt>(s->node)) ++*asserts;
    if (const auto* f = std::get_if<ForallStmt>(&s->node)) {
      count_nodes(f->body, tag_decls, asserts);
    } else if (const auto* r = std::get_if<RangeStmt>(&s->node)) {
      count_nodes(r->body, tag_decls, asserts);
    } else if (const auto* i = std::get_if<IfStmt>(&s->node)) {
      count_nodes(i->body, tag_decls, asserts);
    }
  }
}

}  // namespace

int count_tag_decls(const Kernel& k) {
  int t = 0, a = 0;
  count_nodes(k.body, &t, &a);
  return t;
}

int count_asserts(const Kernel& k) {
  int t = 0, a = 0;
  count_nodes(k.body, &t, &a);
  return a;
}

}  // namespace tilecheck::ast
