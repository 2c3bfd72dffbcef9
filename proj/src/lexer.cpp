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

#include "tilecheck/lexer.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

#include "tilecheck/diag.hpp"

namespace tilecheck {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::kEof: return "end of input";
    case Tok::kNewline: return "newline";
    case Tok::kIndent: return "indent";
    case Tok::kDedent: return "dedent";
    case Tok::kIdent: return "identifier";
    case Tok::kInt: return "integer";
    case Tok::kFloat: return "float";
    case Tok::kDef: return "'def'";
    case Tok::kForall: return "'forall'";
    case Tok::kFor: return "'for'";
    case Tok::kIn: return "'in'";
    case Tok::kIf: return "'if'";
    case Tok::kElse: return "'else'";
    case Tok::kAssert: return "'assert'";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kStar: return "'*'";
    case Tok::kSlash: return "'/'";
    case Tok::kPercent: return "'%'";
    case Tok::kAmp: return "'&'";
    case Tok::kPipe: return "'|'";
    case Tok::kCaret: return "'^'";
    case Tok::kShl: return "'<<'";
    case Tok::kShr: return "'>>'";
    case Tok::kLt: return "'<'";
    case Tok::kLe: return "'<='";
    case Tok::kGt: return "'>'";
    case Tok::kGe: return "'>='";
    case Tok::kEqEq: return "'=='";
    case Tok::kNe: return "'!='";
    case Tok::kAssign: return "'='";
    case Tok::kArrow: return "'->'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kLBracket: return "'['";
    case Tok::kRBracket: return "']'";
    case Tok::kComma: return "','";
    case Tok::kColon: return "':'";
    case Tok::kDot: return "'.'";
  }
  return "?";
}

namespace {

Tok keyword_or_ident(std::string_view word) {
  if (word == "def") return Tok::kDef;
  if (word == "forall") return Tok::kForall;
  if (word == "for") return Tok::kFor;
  if (word == "in") return Tok::kIn;
  if (word == "if") return Tok::kIf;
  if (word == "else") return Tok::kElse;
  if (word == "assert") return Tok::kAssert;
  return Tok::kIdent;
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::vector<int> indents{0};
  int paren_depth = 0;
  std::size_t pos = 0;
  int line_no = 0;

  auto push = [&](Tok kind, std::string text, int line, int col) {
    out.push_back(Token{kind, std::move(text), 0, 0.0, line, col});
  };

  while (pos < src.size()) {
    // Take one physical line.
    std::size_t eol = src.find('\n', pos);
    if (eol == std::string_view::npos) eol = src.size();
    std::string_view line = src.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    std::size_t i = 0;
    if (paren_depth == 0) {
      // Measure indentation in spaces.
      int width = 0;
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
        if (line[i] == '\t') {
          throw ParseError(line_no, static_cast<int>(i) + 1,
                           "tab in indentation; use spaces");
        }
        ++width;
        ++i;
      }
      // Blank or comment-only lines do not affect indentation.
      if (i >= line.size() || line[i] == '#') continue;
      if (width > indents.back()) {
        indents.push_back(width);
        push(Tok::kIndent, "", line_no, 1);
      } else {
        while (width < indents.back()) {
          indents.pop_back();
          push(Tok::kDedent, "", line_no, 1);
        }
        if (width != indents.back()) {
          throw ParseError(line_no, 1,
                           "unindent does not match any outer level");
        }
      }
    }

    bool emitted = false;
    while (i < line.size()) {
      char c = line[i];
      int col = static_cast<int>(i) + 1;
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '#') break;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = i;
        while (i < line.size() &&
               (std::isalnum(static_cast<unsigned char>(line[i])) ||
                line[i] == '_')) {
          ++i;
        }
        std::string word(line.substr(start, i - start));
        push(keyword_or_ident(word), std::move(word), line_no, col);
        emitted = true;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = i;
        while (i < line.size() &&
               std::isdigit(static_cast<unsigned char>(line[i]))) {
          ++i;
        }
        bool is_float = false;
        if (i < line.size() && line[i] == '.') {
          is_float = true;
          ++i;
          while (i < line.size() &&
                 std::isdigit(static_cast<unsigned char>(line[i]))) {
            ++i;
          }
        }
        if (i < line.size() && (line[i] == 'e' || line[i] == 'E')) {
          is_float = true;
          ++i;
          if (i < line.size() && (line[i] == '+' || line[i] == '-')) ++i;
          while (i < line.size() &&
                 std::isdigit(static_cast<unsigned char>(line[i]))) {
            ++i;
          }
        }
        std::string text(line.substr(start, i - start));
        Token t{is_float ? Tok::kFloat : Tok::kInt, text, 0, 0.0, line_no,
                col};
        if (is_float) {
          t.float_val = std::strtod(text.c_str(), nullptr);
        } else {
          auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                         t.int_val);
          if (ec != std::errc() || p != text.data() + text.size()) {
            throw ParseError(line_no, col, "integer literal out of range");
          }
        }
        out.push_back(std::move(t));
        emitted = true;
        continue;
      }
      auto two = [&](char second) {
        return i + 1 < line.size() && line[i + 1] == second;
      };
      Tok kind;
      int len = 1;
      switch (c) {
        case '+': kind = Tok::kPlus; break;
        case '-':
          if (two('>')) { kind = Tok::kArrow; len = 2; }
          else kind = Tok::kMinus;
          break;
        case '*': kind = Tok::kStar; break;
        case '/': kind = Tok::kSlash; break;
        case '%': kind = Tok::kPercent; break;
        case '&': kind = Tok::kAmp; break;
        case '|': kind = Tok::kPipe; break;
        case '^': kind = Tok::kCaret; break;
        case '<':
          if (two('<')) { kind = Tok::kShl; len = 2; }
          else if (two('=')) { kind = Tok::kLe; len = 2; }
          else kind = Tok::kLt;
          break;
        case '>':
          if (two('>')) { kind = Tok::kShr; len = 2; }
          else if (two('=')) { kind = Tok::kGe; len = 2; }
          else kind = Tok::kGt;
          break;
        case '=':
          if (two('=')) { kind = Tok::kEqEq; len = 2; }
          else kind = Tok::kAssign;
          break;
        case '!':
          if (two('=')) { kind = Tok::kNe; len = 2; }
          else throw ParseError(line_no, col, "stray '!'", "'!='");
          break;
        case '(': kind = Tok::kLParen; ++paren_depth; break;
        case ')':
          kind = Tok::kRParen;
          if (--paren_depth < 0) {
            throw ParseError(line_no, col, "unbalanced ')'");
          }
          break;
        case '[': kind = Tok::kLBracket; ++paren_depth; break;
        case ']':
          kind = Tok::kRBracket;
          if (--paren_depth < 0) {
            throw ParseError(line_no, col, "unbalanced ']'");
          }
          break;
        case ',': kind = Tok::kComma; break;
        case ':': kind = Tok::kColon; break;
        case '.': kind = Tok::kDot; break;
        default:
          throw ParseError(line_no, col,
                           std::string("unexpected character '") + c + "'");
      }
      push(kind, std::string(line.substr(i, len)), line_no, col);
      i += len;
      emitted = true;
    }
    if (emitted && paren_depth == 0) {
      push(Tok::kNewline, "", line_no, static_cast<int>(line.size()) + 1);
    }
  }
  if (paren_depth != 0) {
    throw ParseError(line_no, 1, "unbalanced parentheses at end of input");
  }
  while (indents.back() > 0) {
    indents.pop_back();
    push(Tok::kDedent, "", line_no + 1, 1);
  }
  push(Tok::kEof, "", line_no + 1, 1);
  return out;
}

}  // namespace tilecheck
