// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace kerntuner {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Counter-based uniform generator. Every draw is a pure function of
/// (stream, counter), so data can be regenerated bit-identically from the
/// seed without storing it, and draws are platform-independent (integer
/// mixing plus one exact power-of-two scale).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view tag, std::uint64_t index)
      : stream_(splitmix64(splitmix64(splitmix64(seed) ^ fnv1a64(tag)) ^ index)) {}

  explicit CounterRng(std::uint64_t stream) : stream_(stream) {}

  double uniform(std::uint64_t counter, double lo, double hi) const {
    const std::uint64_t h = splitmix64(stream_ ^ (counter * 0xD1B54A32D192ED03ull));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + (hi - lo) * u;
  }

  std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(stream_ ^ (counter * 0xD1B54A32D192ED03ull));
  }

 private:
  std::uint64_t stream_;
};

}  // namespace kerntuner
