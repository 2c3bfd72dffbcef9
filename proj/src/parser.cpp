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

#include "tilecheck/parser.hpp"

#include <set>
#include <utility>

#include "tilecheck/diag.hpp"
#include "tilecheck/lexer.hpp"

namespace tilecheck {

namespace {

using ast::Expr;
using ast::ExprPtr;
using ast::Stmt;
using ast::StmtPtr;

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ast::Kernel parse_kernel();
  std::vector<ast::TagDeclStmt> parse_tag_file();

 private:
  ast::TagDeclStmt parse_tag_decl_tail(std::string name);
  const Token& peek(int ahead = 0) const {
    std::size_t i = pos_ + static_cast<std::size_t>(ahead);
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool check(Tok kind, int ahead = 0) const { return peek(ahead).kind == kind; }
  bool check_word(const char* word, int ahead = 0) const {
    return peek(ahead).kind == Tok::kIdent && peek(ahead).text == word;
  }
  const Token& advance() { return toks_[pos_++]; }
  bool accept(Tok kind) {
    if (!check(kind)) return false;
    ++pos_;
    return true;
  }
  Token expect(Tok kind, const char* what) {
    if (!check(kind)) {
      throw ParseError(peek().line, peek().col,
                       std::string("unexpected ") + tok_name(peek().kind),
                       what);
    }
    return advance();
  }
  std::string expect_ident(const char* what) {
    return expect(Tok::kIdent, what).text;
  }
  void expect_word(const char* word) {
    if (!check_word(word)) {
      throw ParseError(peek().line, peek().col,
                       std::string("unexpected ") + tok_name(peek().kind),
                       std::string("'") + word + "'");
    }
    ++pos_;
  }
  [[noreturn]] void error_here(const std::string& msg,
                               std::string expected = "") {
    throw ParseError(peek().line, peek().col, msg, std::move(expected));
  }

  Dtype parse_dtype();
  std::vector<ExprPtr> parse_shape_tuple();
  ast::Param parse_param();
  std::vector<StmtPtr> parse_block();
  std::vector<StmtPtr> parse_suite();
  void parse_statement(std::vector<StmtPtr>* out);
  StmtPtr parse_assert();
  ExprPtr parse_tag_ref();

  ExprPtr parse_expr();       // conditional and below
  ExprPtr parse_condition();  // single comparison
  ExprPtr parse_bitor();
  ExprPtr parse_bitxor();
  ExprPtr parse_bitand();
  ExprPtr parse_shift();
  ExprPtr parse_additive();
  ExprPtr parse_term();
  ExprPtr parse_primary();
  std::vector<ExprPtr> parse_expr_list(Tok close);

  StmtPtr make_stmt(int line, auto&& node) {
    auto s = std::make_shared<Stmt>();
    s->line = line;
    s->node = std::forward<decltype(node)>(node);
    return s;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  // Tensor parameter names, known once the signature is parsed. A tag
  // written against one of these is a declaration over tensor coordinates;
  // against anything else it is a retag of a live tile.
  std::set<std::string> tensor_params_;
};

Dtype Parser::parse_dtype() {
  const Token& t = peek();
  std::string name = expect_ident("an element type");
  auto dt = dtype_from_name(name);
  if (!dt) {
    throw ParseError(t.line, t.col, "unknown element type '" + name + "'");
  }
  return *dt;
}

// "(e1, e2, ...)" with Python's trailing-comma convention accepted.
std::vector<ExprPtr> Parser::parse_shape_tuple() {
  expect(Tok::kLParen, "'('");
  std::vector<ExprPtr> shape;
  shape.push_back(parse_expr());
  while (accept(Tok::kComma)) {
    if (check(Tok::kRParen)) break;  // trailing comma
    shape.push_back(parse_expr());
  }
  expect(Tok::kRParen, "')'");
  return shape;
}

ast::Param Parser::parse_param() {
  ast::Param p;
  p.line = peek().line;
  p.name = expect_ident("a parameter name");
  expect(Tok::kColon, "':'");
  if (check_word("const")) {
    ++pos_;
    return p;
  }
  if (check_word("Tensor")) {
    ++pos_;
    expect(Tok::kLParen, "'('");
    ast::TensorParam t;
    t.shape = parse_shape_tuple();
    expect(Tok::kComma, "','");
    t.dtype = parse_dtype();
    if (accept(Tok::kComma)) {
      expect_word("out");
      t.is_out = true;
    }
    expect(Tok::kRParen, "')'");
    p.tensor = std::move(t);
    return p;
  }
  error_here("bad parameter annotation", "'const' or 'Tensor'");
}

ast::TagDeclStmt Parser::parse_tag_decl_tail(std::string name) {
  ast::TagDeclStmt t;
  t.name = std::move(name);
  expect(Tok::kAssign, "'='");
  t.target = expect_ident("a tensor or tile name");
  expect(Tok::kLBracket, "'['");
  t.coord_vars.push_back(expect_ident("a coordinate variable"));
  while (accept(Tok::kComma)) {
    t.coord_vars.push_back(expect_ident("a coordinate variable"));
  }
  expect(Tok::kRBracket, "']'");
  expect(Tok::kArrow, "'->'");
  t.values = parse_shape_tuple();
  return t;
}

std::vector<ast::TagDeclStmt> Parser::parse_tag_file() {
  std::vector<ast::TagDeclStmt> out;
  while (!check(Tok::kEof)) {
    if (accept(Tok::kNewline)) continue;
    out.push_back(parse_tag_decl_tail(expect_ident("a tag name")));
    if (!check(Tok::kEof)) expect(Tok::kNewline, "a newline");
  }
  return out;
}

ast::Kernel Parser::parse_kernel() {
  ast::Kernel k;
  expect(Tok::kDef, "'def'");
  k.line = peek().line;
  k.name = expect_ident("a kernel name");
  expect(Tok::kLParen, "'('");
  if (!check(Tok::kRParen)) {
    k.params.push_back(parse_param());
    while (accept(Tok::kComma)) k.params.push_back(parse_param());
  }
  expect(Tok::kRParen, "')'");
  expect(Tok::kColon, "':'");
  expect(Tok::kNewline, "a newline");
  expect(Tok::kIndent, "an indented body");
  for (const ast::Param& p : k.params) {
    if (!p.is_const()) tensor_params_.insert(p.name);
  }
  std::vector<StmtPtr> body = parse_block();
  expect(Tok::kEof, "end of input");

  // The first statement fixes the launch grid.
  if (body.empty()) error_here("empty kernel body");
  const auto* call = std::get_if<ast::CallStmt>(&body.front()->node);
  if (call == nullptr || call->callee != "grid" || call->args.size() != 2) {
    throw ParseError(body.front()->line, 1,
                     "the first statement must be grid(gx, gy)");
  }
  k.grid_x = call->args[0];
  k.grid_y = call->args[1];
  k.body.assign(body.begin() + 1, body.end());
  return k;
}

std::vector<StmtPtr> Parser::parse_block() {
  std::vector<StmtPtr> out;
  while (!check(Tok::kDedent) && !check(Tok::kEof)) {
    parse_statement(&out);
  }
  accept(Tok::kDedent);
  return out;
}

// Either an inline statement on the same line or an indented block.
std::vector<StmtPtr> Parser::parse_suite() {
  if (accept(Tok::kNewline)) {
    expect(Tok::kIndent, "an indented block");
    return parse_block();
  }
  std::vector<StmtPtr> out;
  parse_statement(&out);
  return out;
}

ExprPtr Parser::parse_tag_ref() {
  const Token& t = peek();
  expect_word("tag");
  expect(Tok::kLParen, "'('");
  std::string base = expect_ident("a tile name");
  expect(Tok::kLBracket, "'['");
  std::vector<ExprPtr> indices = parse_expr_list(Tok::kRBracket);
  expect(Tok::kRBracket, "']'");
  expect(Tok::kRParen, "')'");
  return Expr::tag_of(base, std::move(indices), t.line);
}

StmtPtr Parser::parse_assert() {
  int line = peek().line;
  expect(Tok::kAssert, "'assert'");
  ast::AssertStmt a;
  a.left = parse_tag_ref();
  if (accept(Tok::kEqEq)) {
    a.op = ast::CmpOp::kEq;
  } else if (accept(Tok::kNe)) {
    a.op = ast::CmpOp::kNe;
  } else {
    error_here("assert requires a tag comparison", "'==' or '!='");
  }
  a.right = parse_tag_ref();
  while (accept(Tok::kFor)) {
    ast::Quant q;
    q.var = expect_ident("a quantifier variable");
    expect(Tok::kIn, "'in'");
    expect_word("range");
    expect(Tok::kLParen, "'('");
    q.count = parse_expr();
    expect(Tok::kRParen, "')'");
    a.quants.push_back(std::move(q));
  }
  expect(Tok::kNewline, "a newline");
  return make_stmt(line, std::move(a));
}

void Parser::parse_statement(std::vector<StmtPtr>* out) {
  int line = peek().line;
  if (check(Tok::kForall)) {
    ++pos_;
    ast::ForallStmt f;
    f.var = expect_ident("a loop variable");
    expect(Tok::kIn, "'in'");
    expect(Tok::kLBracket, "'['");
    f.lo = parse_expr();
    expect(Tok::kComma, "','");
    f.hi = parse_expr();
    expect(Tok::kRParen, "')' (half-open range)");
    expect(Tok::kColon, "':'");
    f.body = parse_suite();
    out->push_back(make_stmt(line, std::move(f)));
    return;
  }
  if (check(Tok::kFor)) {
    ++pos_;
    ast::RangeStmt r;
    r.var = expect_ident("a loop variable");
    expect(Tok::kIn, "'in'");
    expect_word("range");
    expect(Tok::kLParen, "'('");
    r.count = parse_expr();
    expect(Tok::kRParen, "')'");
    expect(Tok::kColon, "':'");
    r.body = parse_suite();
    out->push_back(make_stmt(line, std::move(r)));
    return;
  }
  if (check(Tok::kIf)) {
    ++pos_;
    ast::IfStmt s;
    s.cond = parse_condition();
    expect(Tok::kColon, "':'");
    s.body = parse_suite();
    out->push_back(make_stmt(line, std::move(s)));
    return;
  }
  if (check(Tok::kAssert)) {
    out->push_back(parse_assert());
    return;
  }
  if (!check(Tok::kIdent)) {
    error_here("expected a statement");
  }

  // Calls used as statements: syncthreads(), tag_reset(x), grid(x, y), ...
  if (check(Tok::kLParen, 1)) {
    ast::CallStmt c;
    c.callee = advance().text;
    expect(Tok::kLParen, "'('");
    c.args = parse_expr_list(Tok::kRParen);
    expect(Tok::kRParen, "')'");
    expect(Tok::kNewline, "a newline");
    out->push_back(make_stmt(line, std::move(c)));
    return;
  }

  // Tuple assignment desugars to one assignment per element, applied
  // left to right.
  if (check(Tok::kComma, 1)) {
    std::vector<std::string> targets;
    targets.push_back(expect_ident("an assignment target"));
    while (accept(Tok::kComma)) {
      targets.push_back(expect_ident("an assignment target"));
    }
    expect(Tok::kAssign, "'='");
    std::vector<ExprPtr> values;
    values.push_back(parse_expr());
    while (accept(Tok::kComma)) values.push_back(parse_expr());
    if (values.size() != targets.size()) {
      throw ParseError(line, peek().col,
                       "tuple assignment arity mismatch: " +
                           std::to_string(targets.size()) + " targets, " +
                           std::to_string(values.size()) + " values");
    }
    expect(Tok::kNewline, "a newline");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      ast::AssignStmt a;
      a.target = targets[i];
      a.value = values[i];
      out->push_back(make_stmt(line, std::move(a)));
    }
    return;
  }

  // Tag declarations: NAME = TENSOR[v1, v2] -> (e1, e2). Distinguished from
  // general assignment by scanning the bracketed variable list for '->'.
  if (check(Tok::kAssign, 1) && check(Tok::kIdent, 2) &&
      check(Tok::kLBracket, 3)) {
    int j = 4;
    while (check(Tok::kIdent, j)) {
      ++j;
      if (check(Tok::kComma, j)) {
        ++j;
      } else {
        break;
      }
    }
    if (check(Tok::kRBracket, j) && check(Tok::kArrow, j + 1)) {
      ast::TagDeclStmt t = parse_tag_decl_tail(advance().text);
      expect(Tok::kNewline, "a newline");
      if (tensor_params_.count(t.target)) {
        out->push_back(make_stmt(line, std::move(t)));
      } else {
        ast::RetagStmt r{std::move(t.name), std::move(t.target),
                         std::move(t.coord_vars), std::move(t.values)};
        out->push_back(make_stmt(line, std::move(r)));
      }
      return;
    }
  }

  // Allocations: NAME = make_shared((shape), dtype) / make_local(...).
  if (check(Tok::kAssign, 1) &&
      (check_word("make_shared", 2) || check_word("make_local", 2)) &&
      check(Tok::kLParen, 3)) {
    ast::AllocStmt al;
    al.name = advance().text;
    expect(Tok::kAssign, "'='");
    al.shared = advance().text == "make_shared";
    expect(Tok::kLParen, "'('");
    al.shape = parse_shape_tuple();
    expect(Tok::kComma, "','");
    al.dtype = parse_dtype();
    expect(Tok::kRParen, "')'");
    expect(Tok::kNewline, "a newline");
    out->push_back(make_stmt(line, std::move(al)));
    return;
  }

  // Views: NAME = BASE.view((shape), dtype).
  if (check(Tok::kAssign, 1) && check(Tok::kIdent, 2) && check(Tok::kDot, 3) &&
      check_word("view", 4)) {
    ast::ViewStmt v;
    v.name = advance().text;
    expect(Tok::kAssign, "'='");
    v.base = expect_ident("a tile name");
    expect(Tok::kDot, "'.'");
    expect_word("view");
    expect(Tok::kLParen, "'('");
    v.shape = parse_shape_tuple();
    expect(Tok::kComma, "','");
    v.dtype = parse_dtype();
    expect(Tok::kRParen, "')'");
    expect(Tok::kNewline, "a newline");
    out->push_back(make_stmt(line, std::move(v)));
    return;
  }

  // Plain and subscripted assignment.
  ast::AssignStmt a;
  a.target = expect_ident("an assignment target");
  if (accept(Tok::kLBracket)) {
    a.indices = parse_expr_list(Tok::kRBracket);
    expect(Tok::kRBracket, "']'");
  }
  expect(Tok::kAssign, "'='");
  a.value = parse_expr();
  expect(Tok::kNewline, "a newline");
  out->push_back(make_stmt(line, std::move(a)));
}

std::vector<ExprPtr> Parser::parse_expr_list(Tok close) {
  std::vector<ExprPtr> out;
  if (check(close)) return out;
  out.push_back(parse_expr());
  while (accept(Tok::kComma)) {
    if (check(close)) break;
    out.push_back(parse_expr());
  }
  return out;
}

ExprPtr Parser::parse_expr() {
  int line = peek().line;
  ExprPtr then = parse_bitor();
  if (check(Tok::kIf)) {
    ++pos_;
    ExprPtr cond = parse_condition();
    expect(Tok::kElse, "'else'");
    ExprPtr other = parse_expr();
    return Expr::cond(std::move(cond), std::move(then), std::move(other),
                      line);
  }
  return then;
}

ExprPtr Parser::parse_condition() {
  int line = peek().line;
  ExprPtr lhs = parse_bitor();
  ast::CmpOp op;
  if (accept(Tok::kLt)) op = ast::CmpOp::kLt;
  else if (accept(Tok::kLe)) op = ast::CmpOp::kLe;
  else if (accept(Tok::kGt)) op = ast::CmpOp::kGt;
  else if (accept(Tok::kGe)) op = ast::CmpOp::kGe;
  else if (accept(Tok::kEqEq)) op = ast::CmpOp::kEq;
  else if (accept(Tok::kNe)) op = ast::CmpOp::kNe;
  else error_here("expected a comparison", "'<', '<=', '>', '>=', '==', '!='");
  ExprPtr rhs = parse_bitor();
  return Expr::compare(op, std::move(lhs), std::move(rhs), line);
}

ExprPtr Parser::parse_bitor() {
  ExprPtr e = parse_bitxor();
  while (check(Tok::kPipe)) {
    int line = advance().line;
    e = Expr::binary(ast::BinOp::kOr, std::move(e), parse_bitxor(), line);
  }
  return e;
}

ExprPtr Parser::parse_bitxor() {
  ExprPtr e = parse_bitand();
  while (check(Tok::kCaret)) {
    int line = advance().line;
    e = Expr::binary(ast::BinOp::kXor, std::move(e), parse_bitand(), line);
  }
  return e;
}

ExprPtr Parser::parse_bitand() {
  ExprPtr e = parse_shift();
  while (check(Tok::kAmp)) {
    int line = advance().line;
    e = Expr::binary(ast::BinOp::kAnd, std::move(e), parse_shift(), line);
  }
  return e;
}

ExprPtr Parser::parse_shift() {
  ExprPtr e = parse_additive();
  while (check(Tok::kShl) || check(Tok::kShr)) {
    ast::BinOp op = check(Tok::kShl) ? ast::BinOp::kShl : ast::BinOp::kShr;
    int line = advance().line;
    e = Expr::binary(op, std::move(e), parse_additive(), line);
  }
  return e;
}

ExprPtr Parser::parse_additive() {
  ExprPtr e = parse_term();
  while (check(Tok::kPlus) || check(Tok::kMinus)) {
    ast::BinOp op = check(Tok::kPlus) ? ast::BinOp::kAdd : ast::BinOp::kSub;
    int line = advance().line;
    e = Expr::binary(op, std::move(e), parse_term(), line);
  }
  return e;
}

ExprPtr Parser::parse_term() {
  ExprPtr e = parse_primary();
  while (check(Tok::kStar) || check(Tok::kSlash) || check(Tok::kPercent)) {
    ast::BinOp op = check(Tok::kStar)    ? ast::BinOp::kMul
                    : check(Tok::kSlash) ? ast::BinOp::kDiv
                                         : ast::BinOp::kMod;
    int line = advance().line;
    e = Expr::binary(op, std::move(e), parse_primary(), line);
  }
  return e;
}

ExprPtr Parser::parse_primary() {
  const Token& t = peek();
  if (check(Tok::kInt)) {
    ++pos_;
    return Expr::int_lit(t.int_val, t.line);
  }
  if (check(Tok::kFloat)) {
    ++pos_;
    return Expr::float_lit(t.float_val, t.line);
  }
  if (accept(Tok::kLParen)) {
    ExprPtr e = parse_expr();
    expect(Tok::kRParen, "')'");
    return e;
  }
  if (check(Tok::kIdent)) {
    std::string name = advance().text;
    if (name == "tag") {
      error_here("tag() can only appear in assert statements");
    }
    // The builtin coordinate pseudo-members.
    if ((name == "blockIdx" || name == "threadIdx") && accept(Tok::kDot)) {
      std::string member = expect_ident("'x' or 'y'");
      if (member != "x" && member != "y") {
        error_here("unknown builtin member", "'x' or 'y'");
      }
      return Expr::var(name + "." + member, t.line);
    }
    if (accept(Tok::kLParen)) {
      std::vector<ExprPtr> args = parse_expr_list(Tok::kRParen);
      expect(Tok::kRParen, "')'");
      return Expr::call(std::move(name), std::move(args), t.line);
    }
    if (accept(Tok::kLBracket)) {
      std::vector<ExprPtr> indices = parse_expr_list(Tok::kRBracket);
      expect(Tok::kRBracket, "']'");
      return Expr::subscript(std::move(name), std::move(indices), t.line);
    }
    return Expr::var(std::move(name), t.line);
  }
  error_here("expected an expression");
}

}  // namespace

ast::Kernel parse(std::string_view source) {
  Parser p(tokenize(source));
  return p.parse_kernel();
}

std::vector<ast::TagDeclStmt> parse_tag_decls(std::string_view source) {
  Parser p(tokenize(source));
  return p.parse_tag_file();
}

}  // namespace tilecheck
