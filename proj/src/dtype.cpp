// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/dtype.hpp"

namespace kerntuner {

std::string to_string(DType dt) {
  switch (dt) {
    case DType::fp16: return "fp16";
    case DType::bf16: return "bf16";
    case DType::fp32: return "fp32";
  }
  return "fp32";
}

DType dtype_from_string(const std::string& s) {
  if (s == "fp16") return DType::fp16;
  if (s == "bf16") return DType::bf16;
  if (s == "fp32") return DType::fp32;
  throw ConfigError("unknown dtype: " + s);
}

std::uint16_t f32_to_f16_bits(float value) {
  const std::uint32_t f = std::bit_cast<std::uint32_t>(value);
  const std::uint16_t sign = static_cast<std::uint16_t>((f >> 16) & 0x8000u);
  const int exp = static_cast<int>((f >> 23) & 0xFFu) - 127;
  const std::uint32_t mant = f & 0x7FFFFFu;

  if (exp == 128) {  // inf / nan
    return static_cast<std::uint16_t>(sign | 0x7C00u | (mant ? 0x200u : 0u));
  }

  if (exp >= -14) {  // lands in the normal range (pre-rounding)
    const std::uint32_t m = mant | 0x800000u;  // restore implicit bit: 24 bits
    std::uint32_t rounded = m >> 13;
    const std::uint32_t rem = m & 0x1FFFu;
    if (rem > 0x1000u || (rem == 0x1000u && (rounded & 1u))) ++rounded;
    int e16 = exp + 15;
    if (rounded & 0x800u) {  // mantissa carry bumps the exponent
      ++e16;
      rounded >>= 1;
    }
    if (e16 >= 31) return static_cast<std::uint16_t>(sign | 0x7C00u);  // overflow -> inf
    return static_cast<std::uint16_t>(sign | (static_cast<std::uint32_t>(e16) << 10) |
                                      (rounded & 0x3FFu));
  }

  if (exp < -25) return sign;  // underflows to signed zero

  // subnormal target: shift the 24-bit significand down and round
  const std::uint32_t m = mant | 0x800000u;
  const int shift = 13 + (-14 - exp);  // in [14, 24]
  std::uint32_t rounded = m >> shift;
  const std::uint32_t rem = m & ((1u << shift) - 1u);
  const std::uint32_t half = 1u << (shift - 1);
  if (rem > half || (rem == half && (rounded & 1u))) ++rounded;
  return static_cast<std::uint16_t>(sign | rounded);
}

float f16_bits_to_f32(std::uint16_t h) {
  const std::uint32_t sign = (static_cast<std::uint32_t>(h) & 0x8000u) << 16;
  const std::uint32_t exp = (h >> 10) & 0x1Fu;
  std::uint32_t mant = h & 0x3FFu;

  if (exp == 31) {  // inf / nan
    return std::bit_cast<float>(sign | 0x7F800000u | (mant << 13));
  }
  if (exp == 0) {
    if (mant == 0) return std::bit_cast<float>(sign);
    // normalize the subnormal significand
    int e = -1;
    do {
      mant <<= 1;
      ++e;
    } while (!(mant & 0x400u));
    mant &= 0x3FFu;
    const std::uint32_t e32 = static_cast<std::uint32_t>(127 - 15 - e);
    return std::bit_cast<float>(sign | (e32 << 23) | (mant << 13));
  }
  const std::uint32_t e32 = exp + (127 - 15);
  return std::bit_cast<float>(sign | (e32 << 23) | (mant << 13));
}

double quantize(double v, DType dt) {
  switch (dt) {
    case DType::fp32:
      return static_cast<double>(static_cast<float>(v));
    case DType::fp16:
      return static_cast<double>(f16_bits_to_f32(f32_to_f16_bits(static_cast<float>(v))));
    case DType::bf16:
      return static_cast<double>(round_to_bf16(static_cast<float>(v)));
  }
  return v;
}

}  // namespace kerntuner
