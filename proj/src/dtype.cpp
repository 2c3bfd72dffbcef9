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

#include "tilecheck/dtype.hpp"

#include <cmath>
#include <cstring>

namespace tilecheck {

int dtype_bytes(Dtype t) {
  switch (t) {
    case Dtype::kU8:
    case Dtype::kFP8:
      return 1;
    case Dtype::kU16:
    case Dtype::kBF16:
      return 2;
    case Dtype::kU32:
    case Dtype::kI32:
    case Dtype::kFP32:
      return 4;
    case Dtype::kU64:
      return 8;
    case Dtype::kU128:
      return 16;
    case Dtype::kU256:
      return 32;
  }
  return 0;
}

bool dtype_is_float(Dtype t) {
  return t == Dtype::kBF16 || t == Dtype::kFP8 || t == Dtype::kFP32;
}

const char* dtype_name(Dtype t) {
  switch (t) {
    case Dtype::kU8: return "u8";
    case Dtype::kU16: return "u16";
    case Dtype::kU32: return "u32";
    case Dtype::kU64: return "u64";
    case Dtype::kU128: return "u128";
    case Dtype::kU256: return "u256";
    case Dtype::kI32: return "i32";
    case Dtype::kBF16: return "bf16";
    case Dtype::kFP8: return "fp8";
    case Dtype::kFP32: return "fp32";
  }
  return "?";
}

std::optional<Dtype> dtype_from_name(std::string_view name) {
  if (name == "u8") return Dtype::kU8;
  if (name == "u16") return Dtype::kU16;
  if (name == "u32") return Dtype::kU32;
  if (name == "u64") return Dtype::kU64;
  if (name == "u128") return Dtype::kU128;
  if (name == "u256") return Dtype::kU256;
  if (name == "i32") return Dtype::kI32;
  if (name == "bf16") return Dtype::kBF16;
  if (name == "fp8") return Dtype::kFP8;
  if (name == "fp32") return Dtype::kFP32;
  return std::nullopt;
}

std::uint16_t bf16_from_float(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  if (std::isnan(f)) {
    return static_cast<std::uint16_t>((u >> 16) | 0x0040);  // quiet
  }
  // Round to nearest even: add the carry-in plus half of the dropped field.
  std::uint32_t rounded = u + 0x7fffu + ((u >> 16) & 1u);
  return static_cast<std::uint16_t>(rounded >> 16);
}

float bf16_to_float(std::uint16_t bits) {
  std::uint32_t u = static_cast<std::uint32_t>(bits) << 16;
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

float fp8_to_float(std::uint8_t bits) {
  int sign = (bits >> 7) & 1;
  int exp = (bits >> 3) & 0xf;
  int man = bits & 0x7;
  float mag;
  if (exp == 0xf && man == 0x7) {
    return std::nanf("");
  }
  if (exp == 0) {
    mag = static_cast<float>(man) * 0x1p-9f;  // subnormal: m * 2^-3 * 2^-6
  } else {
    mag = (1.0f + static_cast<float>(man) / 8.0f) *
          std::ldexp(1.0f, exp - 7);
  }
  return sign ? -mag : mag;
}

std::uint8_t fp8_from_float(float f) {
  if (std::isnan(f)) return 0x7f;
  std::uint8_t sign = std::signbit(f) ? 0x80 : 0x00;
  float mag = std::fabs(f);
  if (mag >= 448.0f) return sign | 0x7e;  // saturate to the max finite
  // Finite magnitude codes 0x00..0x7e are monotone in the code value:
  // binary-search the bracketing pair and round to nearest, ties to the
  // even code (exactly one of two adjacent codes is even).
  int lo = 0;
  int hi = 0x7e;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (fp8_to_float(static_cast<std::uint8_t>(mid)) <= mag) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  if (lo == 0x7e) return sign | 0x7e;
  float below = fp8_to_float(static_cast<std::uint8_t>(lo));
  float above = fp8_to_float(static_cast<std::uint8_t>(lo + 1));
  int code;
  if (mag - below < above - mag) {
    code = lo;
  } else if (above - mag < mag - below) {
    code = lo + 1;
  } else {
    code = (lo % 2 == 0) ? lo : lo + 1;
  }
  return sign | static_cast<std::uint8_t>(code);
}

}  // namespace tilecheck
