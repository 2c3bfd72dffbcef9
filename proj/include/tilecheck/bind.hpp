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
#include <map>
#include <string>
#include <vector>

#include "tilecheck/ast.hpp"
#include "tilecheck/dtype.hpp"

namespace tilecheck {

// A kernel whose constant parameters have concrete values: tensor shapes and
// the launch grid are resolved, and the block size is fixed.
struct BoundKernel {
  ast::Kernel kernel;
  std::map<std::string, std::int64_t> consts;

  struct TensorInfo {
    std::string name;
    std::vector<std::int64_t> shape;
    Dtype dtype = Dtype::kU8;
    bool is_out = false;
  };
  std::vector<TensorInfo> tensors;  // in parameter order

  std::int64_t grid_x = 1;
  std::int64_t grid_y = 1;
  std::int64_t threads = 1;  // threads per block, from the const of that name

  const TensorInfo* find_tensor(const std::string& name) const;
};

// Resolves the kernel against the given constant bindings. Every const
// parameter must be bound, every binding must name a const parameter, the
// kernel must take a `threads` constant, tensor extents must be positive,
// and the grid must evaluate to at least 1x1.
BoundKernel bind(ast::Kernel kernel,
                 const std::map<std::string, std::int64_t>& bindings);

// Folds an integer expression over the given named values. Understands
// comparisons (as 0/1) and selection; anything else non-integral is an
// error, as are division by zero and out-of-range shifts.
std::int64_t fold_int(const ast::ExprPtr& e,
                      const std::map<std::string, std::int64_t>& env);

}  // namespace tilecheck
