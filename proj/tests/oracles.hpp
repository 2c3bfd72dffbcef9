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
//
// Reference implementations used only by tests. Everything in here is
// written as direct enumeration or textbook math, deliberately sharing no
// logic with the library code it cross-checks.

#pragma once

#include <cstdint>
#include <vector>

#include "tilecheck/layout.hpp"

namespace tilecheck::oracle {

// Offset of a multi-dim coordinate computed with explicit mod/div loops.
std::int64_t eval(const Layout& l, const std::vector<std::int64_t>& coord);

// All offsets of the full coordinate domain, enumerated with an odometer.
std::vector<std::int64_t> enumerate_offsets(const Layout& l);

// 1 + max enumerated offset.
std::int64_t cosize(const Layout& l);

// Linear index -> coordinate, column-major over the dim extents.
std::vector<std::int64_t> delinearize(const Layout& l, std::int64_t index);

// Byte-span compatibility by enumerating the covered byte sets.
bool view_compatible(const Layout& a, const Layout& b);

// Dense double-precision attention: O = softmax(Q K^T) V per (row, head),
// with grouped K/V heads (head h reads kv head h / gqa). Inputs are flat
// row-major (seq, heads, dim) buffers.
std::vector<double> dense_attention(const std::vector<double>& q, int sq,
                                    int hq, int d, const std::vector<double>& k,
                                    const std::vector<double>& v, int hkv,
                                    int gqa);

// Triple-loop matmul: C[m,n] += sum_k A[m,k] * B[k,n], fp32 accumulation.
void matmul_reference(const std::vector<float>& a, int m, int k,
                      const std::vector<float>& b, int n,
                      std::vector<float>& c);

}  // namespace tilecheck::oracle
