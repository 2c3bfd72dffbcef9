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
#include <string>
#include <string_view>
#include <vector>

namespace tilecheck {

enum class Tok {
  kEof,
  kNewline,
  kIndent,
  kDedent,
  kIdent,
  kInt,
  kFloat,
  // Keywords. Everything else (range, Tensor, const, ...) is contextual.
  kDef,
  kForall,
  kFor,
  kIn,
  kIf,
  kElse,
  kAssert,
  // Operators and punctuation.
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kPercent,
  kAmp,
  kPipe,
  kCaret,
  kShl,
  kShr,
  kLt,
  kLe,
  kGt,
  kGe,
  kEqEq,
  kNe,
  kAssign,
  kArrow,
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kComma,
  kColon,
  kDot,
};

struct Token {
  Tok kind;
  std::string text;
  std::int64_t int_val = 0;
  double float_val = 0.0;
  int line = 0;
  int col = 0;
};

const char* tok_name(Tok t);

// Tokenizes a whole source file. Indentation is significant outside of
// parentheses/brackets (emitted as kIndent/kDedent); '#' starts a comment;
// indentation must use spaces. Throws ParseError.
std::vector<Token> tokenize(std::string_view source);

}  // namespace tilecheck
