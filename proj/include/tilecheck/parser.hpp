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

#include <string_view>
#include <vector>

#include "tilecheck/ast.hpp"

namespace tilecheck {

// Parses one kernel definition. Throws ParseError with line/column on
// malformed input.
ast::Kernel parse(std::string_view source);

// Parses a standalone tag file: one `T = Tensor[v1, ...] -> (e1, ...)`
// declaration per line, with blank lines and comments allowed.
std::vector<ast::TagDeclStmt> parse_tag_decls(std::string_view source);

}  // namespace tilecheck
