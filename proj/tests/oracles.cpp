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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace tilecheck::oracle {

std::int64_t eval(const Layout& l, const std::vector<std::int64_t>& coord) {
  std::int64_t off = 0;
  for (std::size_t i = 0; i < l.dims().size(); ++i) {
    const LayoutDim& d = l.dims()[i];
    std::int64_t rest = coord[i];
    for (std::size_t j = 0; j < d.shape.size(); ++j) {
      std::int64_t residue =
          (j + 1 == d.shape.size()) ? rest : rest % d.shape[j];
      off += residue * d.stride[j];
      rest = rest / d.shape[j];
    }
  }
  return off;
}

std::vector<std::int64_t> enumerate_offsets(const Layout& l) {
  std::vector<std::int64_t> extents;
  for (const LayoutDim& d : l.dims()) extents.push_back(d.extent());
  std::vector<std::int64_t> coord(extents.size(), 0);
  std::vector<std::int64_t> out;
  while (true) {
    out.push_back(eval(l, coord));
    std::size_t i = 0;
    for (; i < coord.size(); ++i) {
      if (++coord[i] < extents[i]) break;
      coord[i] = 0;
    }
    if (i == coord.size()) break;
    if (coord.empty()) break;
  }
  return out;
}

std::int64_t cosize(const Layout& l) {
  std::int64_t max_off = 0;
  for (std::int64_t off : enumerate_offsets(l)) max_off = std::max(max_off, off);
  return max_off + 1;
}

std::vector<std::int64_t> delinearize(const Layout& l, std::int64_t index) {
  std::vector<std::int64_t> coord;
  for (const LayoutDim& d : l.dims()) {
    coord.push_back(index % d.extent());
    index /= d.extent();
  }
  return coord;
}

bool view_compatible(const Layout& a, const Layout& b) {
  // Density established by enumeration: the maximum reached offset plus one
  // must equal the number of coordinates.
  auto dense_by_enumeration = [](const Layout& l) {
    std::vector<std::int64_t> offs = enumerate_offsets(l);
    std::int64_t max_off = 0;
    for (std::int64_t o : offs) max_off = std::max(max_off, o);
    return max_off + 1 == static_cast<std::int64_t>(offs.size());
  };
  return a.byte_span() == b.byte_span() && dense_by_enumeration(a) &&
         dense_by_enumeration(b);
}

std::vector<double> dense_attention(const std::vector<double>& q, int sq,
                                    int hq, int d, const std::vector<double>& k,
                                    const std::vector<double>& v, int hkv,
                                    int gqa) {
  std::vector<double> out(static_cast<std::size_t>(sq) * hq * d, 0.0);
  auto at = [&](const std::vector<double>& t, int heads, int row, int h,
                int col) -> double {
    return t[(static_cast<std::size_t>(row) * heads + h) * d + col];
  };
  for (int h = 0; h < hq; ++h) {
    int kvh = h / gqa;
    (void)hkv;
    for (int r = 0; r < sq; ++r) {
      std::vector<double> scores(sq);
      double row_max = -1e300;
      for (int c = 0; c < sq; ++c) {
        double s = 0.0;
        for (int x = 0; x < d; ++x) {
          s += at(q, hq, r, h, x) * at(k, hkv, c, kvh, x);
        }
        scores[c] = s;
        row_max = std::max(row_max, s);
      }
      double denom = 0.0;
      for (int c = 0; c < sq; ++c) {
        scores[c] = std::exp(scores[c] - row_max);
        denom += scores[c];
      }
      for (int x = 0; x < d; ++x) {
        double acc = 0.0;
        for (int c = 0; c < sq; ++c) {
          acc += scores[c] * at(v, hkv, c, kvh, x);
        }
        out[(static_cast<std::size_t>(r) * hq + h) * d + x] = acc / denom;
      }
    }
  }
  return out;
}

void matmul_reference(const std::vector<float>& a, int m, int k,
                      const std::vector<float>& b, int n,
                      std::vector<float>& c) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      float acc = c[static_cast<std::size_t>(i) * n + j];
      for (int x = 0; x < k; ++x) {
        acc += a[static_cast<std::size_t>(i) * k + x] *
               b[static_cast<std::size_t>(x) * n + j];
      }
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

}  // namespace tilecheck::oracle
