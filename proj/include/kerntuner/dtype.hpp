// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "kerntuner/errors.hpp"

namespace kerntuner {

enum class DType { fp16, bf16, fp32 };

constexpr int element_bytes(DType dt) {
  return dt == DType::fp32 ? 4 : 2;
}

std::string to_string(DType dt);
DType dtype_from_string(const std::string& s);

// IEEE binary16 <-> binary32 conversion with round-to-nearest-even.
// Kept as explicit bit manipulation so rounding is identical on every
// platform regardless of FPU flags or _Float16 availability.
std::uint16_t f32_to_f16_bits(float value);
float f16_bits_to_f32(std::uint16_t h);

// Round a float to the nearest bfloat16 (RNE on the upper 16 bits).
inline float round_to_bf16(float x) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(x);
  const std::uint32_t lsb = (bits >> 16) & 1u;
  bits += 0x7FFFu + lsb;
  bits &= 0xFFFF0000u;
  return std::bit_cast<float>(bits);
}

/// Round `v` to the nearest value representable in `dt`.
///
/// All storage dtypes embed exactly into float, and float embeds exactly
/// into double, so the result is the stored value a real kernel would
/// produce. The double->float->half chain performs correct RNE rounding
/// (float keeps >= 2*11+2 significand bits).
double quantize(double v, DType dt);

/// Same rounding, returned in the float storage representation.
inline float quantize_store(double v, DType dt) {
  return static_cast<float>(quantize(v, dt));
}

}  // namespace kerntuner
