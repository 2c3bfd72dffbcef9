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

#include <stdexcept>
#include <string>

namespace tilecheck {

// Failure classes, in the order the pipeline can hit them. The CLI maps
// these onto exit codes; see docs/formats.md.
enum class ErrorKind {
  kConfig,     // bad flags, malformed manifests, broken data files
  kParse,      // lexical or syntax error
  kBind,       // missing/invalid constant bindings, non-positive extents
  kLayout,     // layout construction or evaluation errors
  kSafety,     // out-of-bounds access, incompatible view, bad operands
  kCap,        // instance/domain cap exceeded
  kTransport,  // chat transport failure
  kInternal,   // a broken invariant inside the tool itself
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Syntax/lexical error with a source position and, when useful, the token
// set the parser would have accepted.
class ParseError : public Error {
 public:
  ParseError(int line, int col, const std::string& message,
             std::string expected = "")
      : Error(ErrorKind::kParse, "line " + std::to_string(line) + ":" +
                                     std::to_string(col) + ": " + message +
                                     (expected.empty()
                                          ? ""
                                          : " (expected " + expected + ")")),
        line_(line),
        col_(col),
        expected_(std::move(expected)) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::string expected_;
};

}  // namespace tilecheck
