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

#include "tilecheck/layout.hpp"

#include <algorithm>
#include <sstream>

#include "tilecheck/diag.hpp"

namespace tilecheck {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw Error(ErrorKind::kLayout, msg);
}

}  // namespace

std::int64_t LayoutDim::extent() const {
  std::int64_t e = 1;
  for (std::int64_t s : shape) e *= s;
  return e;
}

Layout Layout::make(std::vector<LayoutDim> dims, std::int64_t element_bytes) {
  if (element_bytes <= 0) fail("element_bytes must be positive");
  std::int64_t size = 1;
  std::int64_t min_off = 0;
  for (const LayoutDim& d : dims) {
    if (d.shape.empty()) fail("empty shape tuple");
    if (d.shape.size() != d.stride.size()) {
      fail("shape/stride arity mismatch: " + std::to_string(d.shape.size()) +
           " vs " + std::to_string(d.stride.size()));
    }
    for (std::size_t i = 0; i < d.shape.size(); ++i) {
      if (d.shape[i] < 1) fail("non-positive shape entry");
      if (d.stride[i] < 0) min_off += (d.shape[i] - 1) * d.stride[i];
    }
    size *= d.extent();
    if (size > kMaxLayoutElems) {
      fail("layout exceeds the element cap of " +
           std::to_string(kMaxLayoutElems));
    }
  }
  if (min_off < 0) {
    fail("layout reaches negative offsets (min offset " +
         std::to_string(min_off) + ")");
  }
  Layout l;
  l.dims_ = std::move(dims);
  l.element_bytes_ = element_bytes;
  return l;
}

Layout Layout::make_flat(const std::vector<std::int64_t>& shapes,
                         const std::vector<std::int64_t>& strides,
                         std::int64_t element_bytes) {
  if (shapes.size() != strides.size()) fail("shape/stride arity mismatch");
  std::vector<LayoutDim> dims;
  dims.reserve(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    dims.push_back(LayoutDim{{shapes[i]}, {strides[i]}});
  }
  return make(std::move(dims), element_bytes);
}

Layout Layout::contiguous(const std::vector<std::int64_t>& shapes,
                          std::int64_t element_bytes) {
  std::vector<std::int64_t> strides(shapes.size(), 1);
  for (std::size_t i = shapes.size(); i-- > 1;) {
    strides[i - 1] = strides[i] * shapes[i];
  }
  return make_flat(shapes, strides, element_bytes);
}

Layout Layout::identity(std::int64_t n, std::int64_t element_bytes) {
  return make_flat({n}, {1}, element_bytes);
}

std::int64_t Layout::size() const {
  std::int64_t s = 1;
  for (const LayoutDim& d : dims_) s *= d.extent();
  return s;
}

std::int64_t Layout::cosize() const {
  // Residues of distinct entries are independently maximal at the last
  // coordinate, so the max offset is the sum of per-entry maxima.
  std::int64_t max_off = 0;
  for (const LayoutDim& d : dims_) {
    for (std::size_t i = 0; i < d.shape.size(); ++i) {
      max_off += (d.shape[i] - 1) * std::max<std::int64_t>(d.stride[i], 0);
    }
  }
  return max_off + 1;
}

std::int64_t Layout::eval(std::span<const std::int64_t> coord) const {
  if (coord.size() != dims_.size()) {
    fail("coordinate rank " + std::to_string(coord.size()) +
         " does not match layout rank " + std::to_string(dims_.size()));
  }
  std::int64_t off = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const LayoutDim& d = dims_[i];
    std::int64_t c = coord[i];
    if (c < 0 || c >= d.extent()) {
      fail("coordinate " + std::to_string(c) + " out of domain for dim " +
           std::to_string(i) + " (extent " + std::to_string(d.extent()) + ")");
    }
    for (std::size_t j = 0; j + 1 < d.shape.size(); ++j) {
      off += (c % d.shape[j]) * d.stride[j];
      c /= d.shape[j];
    }
    off += c * d.stride.back();
  }
  return off;
}

std::int64_t Layout::eval_linear(std::int64_t index) const {
  if (index < 0 || index >= size()) fail("linear index out of domain");
  std::int64_t off = 0;
  for (const LayoutDim& d : dims_) {
    for (std::size_t j = 0; j < d.shape.size(); ++j) {
      off += (index % d.shape[j]) * d.stride[j];
      index /= d.shape[j];
    }
  }
  return off;
}

std::string Layout::str() const {
  std::ostringstream os;
  auto tuple = [&](const std::vector<std::int64_t>& v) {
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ",";
      os << v[i];
    }
    os << ")";
  };
  os << "(";
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ",";
    if (dims_[i].shape.size() == 1) {
      os << dims_[i].shape[0];
    } else {
      tuple(dims_[i].shape);
    }
  }
  os << "):(";
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ",";
    if (dims_[i].stride.size() == 1) {
      os << dims_[i].stride[0];
    } else {
      tuple(dims_[i].stride);
    }
  }
  os << "):" << element_bytes_ << "B";
  return os.str();
}

namespace {

struct Radix {
  std::int64_t shape;
  std::int64_t stride;
};

// Outer flattened to its mixed-radix form (dim 0 fastest, nested entries
// fastest-first), with unit radices dropped and linear runs coalesced so a
// contiguous outer collapses to a single radix.
std::vector<Radix> flatten_coalesce(const Layout& l) {
  std::vector<Radix> out;
  for (const LayoutDim& d : l.dims()) {
    for (std::size_t j = 0; j < d.shape.size(); ++j) {
      if (d.shape[j] == 1) continue;
      Radix r{d.shape[j], d.stride[j]};
      if (!out.empty() && out.back().stride * out.back().shape == r.stride) {
        out.back().shape *= r.shape;
      } else {
        out.push_back(r);
      }
    }
  }
  return out;
}

// The factors covering one affine progression {0, t, 2t, ..., (s-1)t}
// through the outer radices, plus the interval of radix indices consumed.
struct FactorRun {
  std::vector<Radix> factors;
  int lo = -1;  // first radix index used, -1 when none (s==1 or t==0)
  int hi = -1;
  // Combined-usage bound when the run stays inside a single radix: the
  // largest offset (s-1)*step reached within that radix.
  std::int64_t span_within = 0;
  // True when the emitted factors cover more than the requested extent
  // (a wrap left a remainder). Sound only for the last non-unit entry of
  // an inner dim; anywhere else the residue chain of the following
  // entries would be cut against the wrong divisor.
  bool overshoot = false;
};

FactorRun walk_progression(const std::vector<Radix>& radices, std::int64_t s,
                           std::int64_t t, std::int64_t outer_size) {
  FactorRun run;
  if (s == 1) {
    run.factors.push_back({1, 0});
    return run;
  }
  if (t == 0) {
    run.factors.push_back({s, 0});
    return run;
  }
  // Consume the stride: skip whole radices that divide it.
  std::size_t i = 0;
  std::int64_t step = t;
  while (i < radices.size() && step >= radices[i].shape) {
    if (step % radices[i].shape != 0) {
      fail("compose: stride " + std::to_string(t) +
           " splits radix " + std::to_string(radices[i].shape));
    }
    step /= radices[i].shape;
    ++i;
  }
  if (i == radices.size()) {
    fail("compose: domain overflow (stride " + std::to_string(t) +
         " reaches past outer size " + std::to_string(outer_size) + ")");
  }
  run.lo = static_cast<int>(i);
  std::int64_t need = s;
  std::int64_t covered = 1;
  while (need > 1) {
    if (i == radices.size()) {
      fail("compose: domain overflow (inner extent " + std::to_string(s) +
           " at stride " + std::to_string(t) + " reaches past outer size " +
           std::to_string(outer_size) + ")");
    }
    const Radix& r = radices[i];
    if ((need - 1) * step <= r.shape - 1) {
      // Final (possibly partial) factor fits inside this radix.
      run.factors.push_back({need, step * r.stride});
      run.hi = static_cast<int>(i);
      run.span_within = (need - 1) * step;
      covered *= need;
      need = 1;
    } else {
      if (r.shape % step != 0) {
        fail("compose: step " + std::to_string(step) +
             " does not wrap radix " + std::to_string(r.shape));
      }
      std::int64_t q = r.shape / step;
      run.factors.push_back({q, step * r.stride});
      run.hi = static_cast<int>(i);
      covered *= q;
      need = (need + q - 1) / q;
      step = 1;
      ++i;
    }
  }
  run.overshoot = covered != s;
  return run;
}

}  // namespace

Layout compose(const Layout& outer, const Layout& inner) {
  if (inner.cosize() > outer.size()) {
    fail("compose: inner cosize " + std::to_string(inner.cosize()) +
         " exceeds outer size " + std::to_string(outer.size()));
  }
  std::vector<Radix> radices = flatten_coalesce(outer);
  std::int64_t outer_size = outer.size();

  // Walk every flattened inner entry; each yields a factor run. Runs must
  // occupy disjoint radix intervals so their offsets add digit-wise, except
  // that several runs may share one radix (where the map is affine) as long
  // as their combined span stays inside it.
  std::vector<FactorRun> runs;
  std::vector<std::vector<Radix>> dim_factors;  // per inner dim, in order
  for (const LayoutDim& d : inner.dims()) {
    std::size_t last_nonunit = 0;
    for (std::size_t j = 0; j < d.shape.size(); ++j) {
      if (d.shape[j] > 1) last_nonunit = j;
    }
    std::vector<Radix> factors;
    for (std::size_t j = 0; j < d.shape.size(); ++j) {
      FactorRun run =
          walk_progression(radices, d.shape[j], d.stride[j], outer_size);
      if (run.overshoot && j != last_nonunit) {
        fail("compose: extent " + std::to_string(d.shape[j]) +
             " wraps with a remainder before further entries of its dim");
      }
      for (const Radix& f : run.factors) factors.push_back(f);
      runs.push_back(std::move(run));
    }
    dim_factors.push_back(std::move(factors));
  }
  for (std::size_t a = 0; a < runs.size(); ++a) {
    if (runs[a].lo < 0) continue;
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      if (runs[b].lo < 0) continue;
      bool disjoint = runs[a].hi < runs[b].lo || runs[b].hi < runs[a].lo;
      if (disjoint) continue;
      bool same_single =
          runs[a].lo == runs[a].hi && runs[b].lo == runs[b].hi &&
          runs[a].lo == runs[b].lo;
      if (!same_single) {
        fail("compose: inner modes interleave across outer radices");
      }
    }
  }
  // Combined span check for radix-sharing runs.
  for (std::size_t i = 0; i < radices.size(); ++i) {
    std::int64_t span = 0;
    int sharers = 0;
    for (const FactorRun& run : runs) {
      if (run.lo == static_cast<int>(i) && run.hi == static_cast<int>(i)) {
        span += run.span_within;
        ++sharers;
      }
    }
    if (sharers > 1 && span > radices[i].shape - 1) {
      fail("compose: combined inner extents overflow a shared radix");
    }
  }

  std::vector<LayoutDim> result;
  result.reserve(dim_factors.size());
  for (std::vector<Radix>& factors : dim_factors) {
    // Coalesce: drop unit factors, fuse adjacent contiguous factors.
    std::vector<Radix> merged;
    for (const Radix& f : factors) {
      if (f.shape == 1) continue;
      if (!merged.empty() &&
          merged.back().stride * merged.back().shape == f.stride) {
        merged.back().shape *= f.shape;
      } else {
        merged.push_back(f);
      }
    }
    if (merged.empty()) merged.push_back({1, 0});
    LayoutDim dim;
    for (const Radix& f : merged) {
      dim.shape.push_back(f.shape);
      dim.stride.push_back(f.stride);
    }
    result.push_back(std::move(dim));
  }
  return Layout::make(std::move(result), outer.element_bytes());
}

bool view_compatible(const Layout& src, const Layout& dst) {
  return src.byte_span() == dst.byte_span() && src.dense() && dst.dense();
}

}  // namespace tilecheck
