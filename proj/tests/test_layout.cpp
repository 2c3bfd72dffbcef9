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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tilecheck/diag.hpp"
#include "tilecheck/dtype.hpp"
#include "tilecheck/layout.hpp"

namespace tilecheck {
namespace {

Layout random_layout(std::mt19937& rng, std::int64_t max_size) {
  std::uniform_int_distribution<int> rank_d(1, 3);
  std::uniform_int_distribution<int> nest_d(1, 3);
  std::uniform_int_distribution<int> shape_d(1, 5);
  const std::int64_t stride_pool[] = {0, 1, 1, 2,  3,  4, 6,
                                      8, 12, 16, 24, 32, 64};
  std::uniform_int_distribution<int> stride_d(0, 12);
  for (;;) {
    std::vector<LayoutDim> dims;
    int rank = rank_d(rng);
    std::int64_t total = 1;
    for (int i = 0; i < rank; ++i) {
      LayoutDim d;
      int nest = nest_d(rng);
      for (int j = 0; j < nest; ++j) {
        d.shape.push_back(shape_d(rng));
        d.stride.push_back(stride_pool[stride_d(rng)]);
      }
      total *= d.extent();
      dims.push_back(std::move(d));
    }
    if (total > max_size) continue;
    return Layout::make(std::move(dims), 1);
  }
}

// A layout whose image fits an outer domain of `budget` elements.
Layout random_inner(std::mt19937& rng, std::int64_t budget) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Layout l = random_layout(rng, 256);
    if (l.cosize() <= budget) return l;
  }
  return Layout::identity(1);
}

// Column-major contiguous layouts flatten to a single radix, so they accept
// any inner whose image fits their domain.
Layout random_colmajor(std::mt19937& rng) {
  std::uniform_int_distribution<int> rank_d(1, 3);
  std::uniform_int_distribution<int> shape_d(2, 6);
  for (;;) {
    int rank = rank_d(rng);
    std::vector<std::int64_t> shapes, strides;
    std::int64_t running = 1;
    for (int i = 0; i < rank; ++i) {
      shapes.push_back(shape_d(rng));
      strides.push_back(running);
      running *= shapes.back();
    }
    if (running > 512) continue;
    return Layout::make_flat(shapes, strides, 1);
  }
}

// Coordinates of the full domain, odometer order (dim 0 fastest).
std::vector<std::vector<std::int64_t>> domain(const Layout& l) {
  std::vector<std::int64_t> extents;
  for (std::size_t i = 0; i < l.rank(); ++i) extents.push_back(l.extent(i));
  std::vector<std::int64_t> coord(extents.size(), 0);
  std::vector<std::vector<std::int64_t>> out;
  for (;;) {
    out.push_back(coord);
    std::size_t i = 0;
    for (; i < coord.size(); ++i) {
      if (++coord[i] < extents[i]) break;
      coord[i] = 0;
    }
    if (i == coord.size()) break;
  }
  return out;
}

// Mismatch count of eval(result, c) against the defining chain
// eval(outer, delinearize(eval(inner, c))) over inner's whole domain,
// everything on the reference side computed by the test oracles.
std::int64_t compose_mismatches(const Layout& outer, const Layout& inner,
                                const Layout& result) {
  std::int64_t bad = 0;
  for (const auto& coord : domain(inner)) {
    std::int64_t through = oracle::eval(inner, coord);
    std::int64_t expect =
        oracle::eval(outer, oracle::delinearize(outer, through));
    if (oracle::eval(result, coord) != expect) ++bad;
  }
  return bad;
}

TEST_SUITE_BEGIN("layout");

TEST_CASE("contiguous strides are trailing shape products") {
  Layout q = Layout::contiguous({128, 8, 128}, 2);
  REQUIRE(q.rank() == 3);
  CHECK(q.dims()[0].stride[0] == 1024);
  CHECK(q.dims()[1].stride[0] == 128);
  CHECK(q.dims()[2].stride[0] == 1);
  const std::int64_t coord[] = {1, 2, 5};
  CHECK(q.eval(coord) == 1285);
  CHECK(q.size() == 128 * 8 * 128);
  CHECK(q.cosize() == q.size());
  CHECK(q.dense());
  CHECK(q.byte_span() == 2 * q.size());
}

TEST_CASE("nested modes decompose their coordinate fastest-first") {
  Layout l = Layout::make({LayoutDim{{4, 2}, {1, 32}}}, 1);
  CHECK(l.extent(0) == 8);
  const std::int64_t c5[] = {5};
  CHECK(l.eval(c5) == 1 * 1 + 1 * 32);  // 5 = 1 + 4*1
  const std::int64_t c7[] = {7};
  CHECK(l.eval(c7) == 3 + 32);
  CHECK(l.size() == 8);
  CHECK(l.cosize() == 1 + 3 * 1 + 1 * 32);
  CHECK(l.str() == "((4,2)):((1,32)):1B");
}

TEST_CASE("size, cosize and density") {
  Layout rowmaj = Layout::make_flat({4, 8}, {8, 1}, 1);
  CHECK(rowmaj.size() == 32);
  CHECK(rowmaj.cosize() == 32);
  CHECK(rowmaj.dense());

  Layout bcast = Layout::make_flat({4}, {0}, 1);
  CHECK(bcast.size() == 4);
  CHECK(bcast.cosize() == 1);
  CHECK_FALSE(bcast.dense());

  Layout gappy = Layout::make_flat({2, 2}, {4, 1}, 1);
  CHECK(gappy.size() == 4);
  CHECK(gappy.cosize() == 6);
  CHECK_FALSE(gappy.dense());
}

TEST_CASE("construction rejects malformed descriptors") {
  CHECK_THROWS_AS(Layout::make({LayoutDim{{4}, {1, 32}}}, 1), Error);
  CHECK_THROWS_AS(Layout::make({LayoutDim{{4, 0}, {1, 32}}}, 1), Error);
  CHECK_THROWS_AS(Layout::make({LayoutDim{{-2}, {1}}}, 1), Error);
  CHECK_THROWS_AS(Layout::make({LayoutDim{{}, {}}}, 1), Error);
  CHECK_THROWS_AS(Layout::make({LayoutDim{{4}, {1}}}, 0), Error);
  // Past the element cap.
  CHECK_THROWS_AS(Layout::contiguous({1 << 13, 1 << 12}, 1), Error);
  // Negative strides only on extent-1 entries, where they contribute nothing.
  CHECK_THROWS_AS(Layout::make_flat({2}, {-1}, 1), Error);
  Layout ok = Layout::make({LayoutDim{{1, 4}, {-5, 1}}}, 1);
  CHECK(ok.cosize() == 4);

  try {
    Layout::make({LayoutDim{{4}, {1, 32}}}, 1);
    FAIL("expected a layout error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kLayout);
  }
}

TEST_CASE("eval rejects out-of-domain coordinates") {
  Layout l = Layout::make_flat({4, 8}, {8, 1}, 1);
  const std::int64_t bad_rank[] = {1};
  CHECK_THROWS_AS(l.eval(bad_rank), Error);
  const std::int64_t too_big[] = {4, 0};
  CHECK_THROWS_AS(l.eval(too_big), Error);
  const std::int64_t negative[] = {0, -1};
  CHECK_THROWS_AS(l.eval(negative), Error);
  CHECK_THROWS_AS(l.eval_linear(32), Error);
  CHECK_THROWS_AS(l.eval_linear(-1), Error);
}

TEST_CASE("identity maps indices to themselves") {
  Layout id = Layout::identity(6);
  for (std::int64_t i = 0; i < 6; ++i) {
    const std::int64_t c[] = {i};
    CHECK(id.eval(c) == i);
  }
}

TEST_CASE("random layouts agree with enumeration oracles") {
  std::mt19937 rng(0xC0FFEE);
  std::int64_t eval_bad = 0, linear_bad = 0, cosize_bad = 0;
  const int kLayouts = 250;
  for (int n = 0; n < kLayouts; ++n) {
    Layout l = random_layout(rng, 2048);
    if (l.cosize() != oracle::cosize(l)) ++cosize_bad;
    std::int64_t idx = 0;
    for (const auto& coord : domain(l)) {
      if (l.eval(coord) != oracle::eval(l, coord)) ++eval_bad;
      if (l.eval_linear(idx) !=
          oracle::eval(l, oracle::delinearize(l, idx))) {
        ++linear_bad;
      }
      ++idx;
    }
    REQUIRE(idx == l.size());
  }
  CHECK(eval_bad == 0);
  CHECK(linear_bad == 0);
  CHECK(cosize_bad == 0);
}

TEST_CASE("compose: frozen examples") {
  // Single-radix outer: strides pass through.
  Layout cm = Layout::make_flat({4, 8}, {1, 4}, 1);
  Layout inner = Layout::make_flat({8}, {2}, 1);
  Layout r = compose(cm, inner);
  CHECK(r == Layout::make_flat({8}, {2}, 1));

  // Row-major outer: a stride-2 progression lands on stride 8.
  Layout rm = Layout::make_flat({8, 4}, {4, 1}, 1);
  Layout r2 = compose(rm, Layout::make_flat({4}, {2}, 1));
  CHECK(r2 == Layout::make_flat({4}, {8}, 1));
  CHECK(compose_mismatches(rm, Layout::make_flat({4}, {2}, 1), r2) == 0);

  // A progression that wraps one radix into the next.
  Layout r3 = compose(rm, Layout::make_flat({4}, {2}, 4));
  CHECK(r3.element_bytes() == 1);  // outer's element size wins

  Layout rm2 = Layout::make_flat({4, 8}, {8, 1}, 1);
  Layout wrap = compose(rm2, Layout::make_flat({4}, {2}, 1));
  CHECK(wrap == Layout::make({LayoutDim{{2, 2}, {16, 1}}}, 1));
  CHECK(compose_mismatches(rm2, Layout::make_flat({4}, {2}, 1), wrap) == 0);

  // Two inner modes sharing one radix, where the map stays affine.
  Layout sharing = compose(
      rm2, Layout::make_flat({2, 2}, {1, 2}, 1));
  CHECK(sharing == Layout::make_flat({2, 2}, {8, 16}, 1));
  CHECK(compose_mismatches(rm2, Layout::make_flat({2, 2}, {1, 2}, 1),
                           sharing) == 0);

  // Composing with the identity on either side changes nothing (left) or
  // flattens (right).
  Layout nested = Layout::make({LayoutDim{{4, 2}, {1, 32}}}, 1);
  Layout left = compose(Layout::identity(nested.cosize()), nested);
  CHECK(left == nested);
  Layout right = compose(nested, Layout::identity(nested.size()));
  std::int64_t flat_bad = 0;
  for (std::int64_t i = 0; i < nested.size(); ++i) {
    const std::int64_t c[] = {i};
    if (right.eval(c) != nested.eval_linear(i)) ++flat_bad;
  }
  CHECK(flat_bad == 0);
}

TEST_CASE("compose: rejected shapes") {
  Layout rm2 = Layout::make_flat({4, 8}, {8, 1}, 1);
  // Image does not fit the outer domain.
  CHECK_THROWS_AS(compose(rm2, Layout::make_flat({5}, {8}, 1)), Error);
  // Stride-3 progression does not wrap a radix of 4.
  CHECK_THROWS_AS(compose(rm2, Layout::make_flat({3, 2}, {3, 1}, 1)), Error);
  // Two modes interleave across radices.
  CHECK_THROWS_AS(compose(rm2, Layout::make_flat({4, 2}, {2, 1}, 1)), Error);
  try {
    compose(rm2, Layout::make_flat({5}, {8}, 1));
    FAIL("expected a layout error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kLayout);
  }
}

TEST_CASE("compose: random cases match delinearized evaluation") {
  std::mt19937 rng(0xBADA55);
  std::int64_t verified = 0, mismatches = 0;

  // Guaranteed-composable pairs: single-radix outers.
  for (int n = 0; n < 150; ++n) {
    Layout outer = random_colmajor(rng);
    Layout inner = random_inner(rng, outer.size());
    Layout result = compose(outer, inner);
    mismatches += compose_mismatches(outer, inner, result);
    ++verified;
  }

  // Arbitrary pairs: accept the composability verdict, but any accepted
  // composition must evaluate correctly.
  for (int n = 0; n < 400; ++n) {
    Layout outer = random_layout(rng, 1024);
    Layout inner = random_inner(rng, outer.size());
    try {
      Layout result = compose(outer, inner);
      mismatches += compose_mismatches(outer, inner, result);
      ++verified;
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::kLayout);
    }
  }
  CHECK(mismatches == 0);
  CHECK(verified >= 200);
}

TEST_CASE("compose: associativity where both orders exist") {
  std::mt19937 rng(0x5EED);
  std::int64_t verified = 0, mismatches = 0;
  for (int n = 0; n < 300; ++n) {
    Layout a = random_colmajor(rng);
    Layout b = random_inner(rng, a.size());
    Layout c = random_inner(rng, b.size());
    Layout ab = compose(a, b);
    Layout lhs, rhs;
    try {
      rhs = compose(a, compose(b, c));
      lhs = compose(ab, c);
    } catch (const Error&) {
      continue;  // conservative rejection is allowed on either side
    }
    for (const auto& coord : domain(c)) {
      std::int64_t through_b = oracle::eval(b, oracle::delinearize(
                                                    b, oracle::eval(c, coord)));
      std::int64_t expect =
          oracle::eval(a, oracle::delinearize(a, through_b));
      if (oracle::eval(lhs, coord) != expect) ++mismatches;
      if (oracle::eval(rhs, coord) != expect) ++mismatches;
    }
    ++verified;
  }
  CHECK(mismatches == 0);
  CHECK(verified >= 50);
}

TEST_CASE("view compatibility") {
  CHECK(view_compatible(Layout::identity(32),
                        Layout::make_flat({4, 8}, {8, 1}, 1)));
  // Same bytes under reinterpretation: 8 x 4B vs 32 x 1B.
  CHECK(view_compatible(Layout::identity(8, 4), Layout::identity(32, 1)));
  // Broadcast dims are not dense.
  CHECK_FALSE(view_compatible(Layout::make_flat({4}, {0}, 1),
                              Layout::identity(4)));
  // Different spans.
  CHECK_FALSE(view_compatible(Layout::identity(8), Layout::identity(16)));

  std::mt19937 rng(0xD1CE);
  std::int64_t disagreements = 0;
  for (int n = 0; n < 300; ++n) {
    Layout a = random_layout(rng, 512);
    Layout b = random_layout(rng, 512);
    if (view_compatible(a, b) != oracle::view_compatible(a, b)) {
      ++disagreements;
    }
    if (view_compatible(a, b) != view_compatible(b, a)) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("dtype");

TEST_CASE("widths and names") {
  CHECK(dtype_bytes(Dtype::kU8) == 1);
  CHECK(dtype_bytes(Dtype::kBF16) == 2);
  CHECK(dtype_bytes(Dtype::kU64) == 8);
  CHECK(dtype_bytes(Dtype::kU128) == 16);
  CHECK(dtype_bytes(Dtype::kU256) == 32);
  CHECK(dtype_bytes(Dtype::kFP32) == 4);
  CHECK(dtype_is_float(Dtype::kBF16));
  CHECK(dtype_is_float(Dtype::kFP8));
  CHECK_FALSE(dtype_is_float(Dtype::kU64));
  for (Dtype t : {Dtype::kU8, Dtype::kU16, Dtype::kU32, Dtype::kU64,
                  Dtype::kU128, Dtype::kU256, Dtype::kI32, Dtype::kBF16,
                  Dtype::kFP8, Dtype::kFP32}) {
    auto back = dtype_from_name(dtype_name(t));
    REQUIRE(back.has_value());
    CHECK(*back == t);
  }
  CHECK_FALSE(dtype_from_name("f64").has_value());
}

TEST_CASE("bf16 narrowing rounds to nearest even") {
  CHECK(bf16_from_float(1.0f) == 0x3F80);
  CHECK(bf16_to_float(0x3F80) == 1.0f);

  auto from_bits = [](std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  };
  // Exactly halfway: ties go to the even 16-bit pattern.
  CHECK(bf16_from_float(from_bits(0x3F808000)) == 0x3F80);
  CHECK(bf16_from_float(from_bits(0x3F818000)) == 0x3F82);
  // Just over halfway rounds up.
  CHECK(bf16_from_float(from_bits(0x3F808001)) == 0x3F81);

  CHECK(bf16_from_float(std::numeric_limits<float>::infinity()) == 0x7F80);
  CHECK(bf16_from_float(-std::numeric_limits<float>::infinity()) == 0xFF80);
  // The largest float is nearer to 2^128 than to the largest bf16.
  CHECK(bf16_from_float(std::numeric_limits<float>::max()) == 0x7F80);

  std::uint16_t qnan = bf16_from_float(std::nanf(""));
  CHECK((qnan & 0x7F80) == 0x7F80);
  CHECK((qnan & 0x007F) != 0);
}

TEST_CASE("bf16 widening round-trips every non-NaN pattern") {
  int bad = 0;
  for (std::uint32_t bits = 0; bits <= 0xFFFF; ++bits) {
    std::uint16_t b = static_cast<std::uint16_t>(bits);
    float f = bf16_to_float(b);
    if (std::isnan(f)) {
      if (!std::isnan(bf16_to_float(bf16_from_float(f)))) ++bad;
    } else if (bf16_from_float(f) != b) {
      ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("fp8 encodes e4m3 without infinities") {
  CHECK(fp8_from_float(1.0f) == 0x38);
  CHECK(fp8_to_float(0x38) == 1.0f);
  CHECK(fp8_from_float(448.0f) == 0x7E);
  CHECK(fp8_from_float(-448.0f) == 0xFE);
  // Saturation, not infinity.
  CHECK(fp8_from_float(1000.0f) == 0x7E);
  CHECK(fp8_from_float(-1000.0f) == 0xFE);
  CHECK(fp8_from_float(std::nanf("")) == 0x7F);
  CHECK(std::isnan(fp8_to_float(0x7F)));
  CHECK(std::isnan(fp8_to_float(0xFF)));

  // Subnormals and ties to the even code.
  CHECK(fp8_to_float(0x01) == 0x1p-9f);
  CHECK(fp8_from_float(0x1p-10f) == 0x00);           // tie: 0 is even
  CHECK(fp8_from_float(1.5f * 0x1p-9f) == 0x02);     // tie: 2 is even
  CHECK(fp8_from_float(2.5f * 0x1p-9f) == 0x02);     // tie: 2 is even
  CHECK(fp8_from_float(0.0f) == 0x00);
  CHECK(fp8_from_float(-0.0f) == 0x80);
}

TEST_CASE("fp8 round-trips every code") {
  int bad = 0;
  for (int code = 0; code < 256; ++code) {
    std::uint8_t b = static_cast<std::uint8_t>(code);
    float f = fp8_to_float(b);
    if (std::isnan(f)) {
      if (fp8_from_float(f) != 0x7F) ++bad;
    } else if (fp8_from_float(f) != b) {
      ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_SUITE_END();

}  // namespace
}  // namespace tilecheck
