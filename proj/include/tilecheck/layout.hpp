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
#include <span>
#include <string>
#include <vector>

namespace tilecheck {

// One mode of a layout. Flat modes carry a single shape/stride entry.
// Nested modes decompose their coordinate against the shape entries
// fastest-first (successive mod/div) and dot the residues with the strides;
// shape and stride tuples always have identical arity.
struct LayoutDim {
  std::vector<std::int64_t> shape;
  std::vector<std::int64_t> stride;

  std::int64_t extent() const;
  bool operator==(const LayoutDim&) const = default;
};

// Map from multi-dimensional logical coordinates (one component per dim) to
// a linear element offset. Strides are in element units; byte offsets are
// element offsets times element_bytes.
class Layout {
 public:
  Layout() = default;

  // Validated general constructor.
  static Layout make(std::vector<LayoutDim> dims, std::int64_t element_bytes);
  // Flat shapes with explicit flat strides.
  static Layout make_flat(const std::vector<std::int64_t>& shapes,
                          const std::vector<std::int64_t>& strides,
                          std::int64_t element_bytes);
  // Contiguous (row-major): the stride of dim i is the product of the
  // shapes after it.
  static Layout contiguous(const std::vector<std::int64_t>& shapes,
                           std::int64_t element_bytes);
  static Layout identity(std::int64_t n, std::int64_t element_bytes = 1);

  std::size_t rank() const { return dims_.size(); }
  const std::vector<LayoutDim>& dims() const { return dims_; }
  std::int64_t element_bytes() const { return element_bytes_; }
  std::int64_t extent(std::size_t i) const { return dims_[i].extent(); }

  std::int64_t size() const;
  // 1 + the maximum offset reachable over the coordinate domain.
  std::int64_t cosize() const;
  std::int64_t byte_span() const { return size() * element_bytes_; }
  bool dense() const { return cosize() == size(); }

  std::int64_t eval(std::span<const std::int64_t> coord) const;
  // Delinearizes a flat index over the dims column-major (dim 0 fastest,
  // nested entries fastest-first within a dim) and evaluates.
  std::int64_t eval_linear(std::int64_t index) const;

  std::string str() const;
  bool operator==(const Layout&) const = default;

 private:
  std::vector<LayoutDim> dims_;
  std::int64_t element_bytes_ = 1;
};

// Per-tile element-count cap that keeps enumeration-based validation
// tractable; exceeding it is a configuration error.
inline constexpr std::int64_t kMaxLayoutElems = std::int64_t{1} << 24;

// Functional composition: eval(compose(outer, inner), c) equals
// eval(outer, delinearize(eval(inner, c))) for every c in inner's domain,
// where delinearize walks outer's flattened extents column-major. Throws
// kLayout when inner's image does not fit outer's domain or when the
// composite is not expressible as a layout.
Layout compose(const Layout& outer, const Layout& inner);

// True iff both layouts cover byte spans of identical total size and each
// is dense over its span (cosize equals size).
bool view_compatible(const Layout& src, const Layout& dst);

}  // namespace tilecheck
