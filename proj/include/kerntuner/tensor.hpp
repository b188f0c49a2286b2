// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "kerntuner/dtype.hpp"
#include "kerntuner/errors.hpp"

namespace kerntuner {

/// Dense row-major tensor. Data is stored as float, which represents every
/// fp16/bf16/fp32 value exactly; values are always pre-quantized to `dtype`.
struct Tensor {
  std::vector<std::int64_t> shape;
  DType dtype = DType::fp32;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<std::int64_t> shape_, DType dtype_)
      : shape(std::move(shape_)), dtype(dtype_), data(static_cast<std::size_t>(numel_of(shape))) {}

  static std::int64_t numel_of(const std::vector<std::int64_t>& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }

  bool same_shape(const Tensor& o) const { return shape == o.shape && dtype == o.dtype; }
};

}  // namespace kerntuner
