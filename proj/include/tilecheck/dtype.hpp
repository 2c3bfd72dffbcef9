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
#include <optional>
#include <string_view>

namespace tilecheck {

// Element types of the DSL. The u* family is opaque bit storage (copy and
// reinterpret only), i32 is opaque-with-a-name for integer payloads, and the
// float family participates in arithmetic (performed in fp32).
enum class Dtype {
  kU8,
  kU16,
  kU32,
  kU64,
  kU128,
  kU256,
  kI32,
  kBF16,
  kFP8,   // e4m3, see docs/formats.md
  kFP32,
};

int dtype_bytes(Dtype t);
bool dtype_is_float(Dtype t);
const char* dtype_name(Dtype t);
std::optional<Dtype> dtype_from_name(std::string_view name);

// bf16 <-> fp32 with round-to-nearest-even on narrowing.
std::uint16_t bf16_from_float(float f);
float bf16_to_float(std::uint16_t bits);

// fp8 is the e4m3 encoding without infinities (0x7f/0xff are NaN); values
// beyond +-448 saturate to the max finite on narrowing, which also rounds
// to nearest-even.
std::uint8_t fp8_from_float(float f);
float fp8_to_float(std::uint8_t bits);

}  // namespace tilecheck
