// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>
#include <vector>

#include "kerntuner/hardware.hpp"
#include "kerntuner/kernels.hpp"
#include "kerntuner/plan.hpp"
#include "oracles.hpp"

namespace kt_test {

using namespace kerntuner;

inline Tensor make_tensor(std::vector<std::int64_t> shape, DType dt,
                          std::initializer_list<double> values) {
  Tensor t(std::move(shape), dt);
  std::size_t i = 0;
  for (double v : values) t.data[i++] = quantize_store(v, dt);
  return t;
}

inline TestSuite single_case_suite(const std::string& kernel_id, TestCase cse) {
  TestSuite s;
  s.kernel_id = kernel_id;
  s.cases.push_back(std::move(cse));
  return s;
}

inline oracle::HwParams oracle_params(const HardwareSpec& hw) {
  return {hw.max_threads_per_block,
          hw.warp_size,
          hw.shared_mem_per_block_bytes,
          hw.registers_per_sm,
          hw.max_warps_per_sm,
          hw.peak_bandwidth_bytes_per_us,
          hw.peak_flops_per_us,
          hw.launch_overhead_us,
          hw.occupancy_floor};
}

}  // namespace kt_test
