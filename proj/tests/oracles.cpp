// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

namespace {
const int kBlockThreads[] = {32, 64, 128, 256, 512, 1024};
const int kItems[] = {1, 2, 4, 8, 16};
const int kUnroll[] = {1, 2, 4, 8};
const int kVec[] = {1, 2, 4, 8};
}  // namespace

std::string Point::id(bool has_use_shared_axis) const {
  std::string s = "BLOCK_THREADS=" + std::to_string(block_threads) +
                  ",ITEMS_PER_THREAD=" + std::to_string(items_per_thread) +
                  ",UNROLL=" + std::to_string(unroll);
  if (has_use_shared_axis) s += ",USE_SHARED=" + std::to_string(use_shared);
  s += ",VEC_WIDTH=" + std::to_string(vec_width);
  return s;
}

Usage usage_of(const Point& p, int eb, const HwParams& hw) {
  Usage u;
  u.shared_bytes = p.use_shared * p.block_threads * p.vec_width * eb * 2;
  u.registers_per_thread = 24 + 4 * p.unroll + 2 * p.vec_width + 2 * p.items_per_thread;

  const double warp_limit = static_cast<double>(hw.max_warps_per_sm) * hw.warp_size /
                            static_cast<double>(p.block_threads);
  const double register_limit =
      static_cast<double>(hw.registers_per_sm) /
      (static_cast<double>(u.registers_per_thread) * static_cast<double>(p.block_threads));
  const double shared_limit =
      u.shared_bytes == 0 ? std::numeric_limits<double>::infinity()
                          : std::floor(2.0 * hw.shared_mem_per_block_bytes / u.shared_bytes);
  const double blocks = std::floor(std::min({warp_limit, register_limit, shared_limit}));
  u.occupancy = std::min(1.0, blocks * p.block_threads /
                                  (static_cast<double>(hw.max_warps_per_sm) * hw.warp_size));
  return u;
}

std::optional<std::string> violation_of(const Point& p, int eb, std::int64_t innermost_extent,
                                        const HwParams& hw) {
  const Usage u = usage_of(p, eb, hw);
  if (p.block_threads > hw.max_threads_per_block) return "THREADS_EXCEEDED";
  if (u.shared_bytes > hw.shared_mem_per_block_bytes) return "SHARED_EXCEEDED";
  if (static_cast<long long>(u.registers_per_thread) * p.block_threads > hw.registers_per_sm)
    return "REGISTERS_EXCEEDED";
  if (u.occupancy < hw.occupancy_floor) return "OCCUPANCY_FLOOR";
  if (innermost_extent % p.vec_width != 0) return "ALIGNMENT";
  return std::nullopt;
}

std::int64_t bytes_of(const KernelShape& ks, bool epilogue_fused) {
  const std::int64_t eb = ks.element_bytes;
  std::int64_t bytes = 0, primary = 0;
  if (ks.kernel_id == "silu_and_mul") {
    const auto m = ks.dims[0], n = ks.dims[1];
    bytes = eb * (2 * m * n + m * n);
    primary = m * n;
  } else if (ks.kernel_id == "fused_add_rmsnorm") {
    const auto m = ks.dims[0], n = ks.dims[1];
    bytes = eb * (4 * m * n + n);
    primary = m * n;
  } else {
    const auto n = ks.dims[0], h = ks.dims[1], d = ks.dims[2];
    bytes = eb * (3 * n * h * d + 3 * n * h);
    primary = n * h * d;
  }
  if (!epilogue_fused) bytes += 2 * eb * primary;
  return bytes;
}

std::int64_t flops_of(const KernelShape& ks) {
  if (ks.kernel_id == "silu_and_mul") return 8 * ks.dims[0] * ks.dims[1];
  if (ks.kernel_id == "fused_add_rmsnorm") return ks.dims[0] * (5 * ks.dims[1] + 5);
  return ks.dims[0] * ks.dims[1] * (17 + 4 * ks.dims[2]);
}

double time_of(const Point& p, const KernelShape& ks, bool staging_shared, bool epilogue_fused,
               const HwParams& hw) {
  const Usage u = usage_of(p, ks.element_bytes, hw);
  const double vec_eff =
      std::min(1.0, static_cast<double>(p.vec_width) * ks.element_bytes / 16.0);
  const bool reuse = ks.kernel_id == "fused_add_rmsnorm";
  const double stage_eff = (p.use_shared == 1 && staging_shared && reuse) ? 1.15 : 1.0;
  const double unroll_eff =
      std::min(1.0, 0.7 + 0.1 * std::log2(static_cast<double>(p.unroll)));
  const double mem = static_cast<double>(bytes_of(ks, epilogue_fused)) /
                     (hw.peak_bandwidth_bytes_per_us * vec_eff * stage_eff);
  const double comp = static_cast<double>(flops_of(ks)) / (hw.peak_flops_per_us * unroll_eff);
  return hw.launch_overhead_us + std::max(mem, comp) / u.occupancy;
}

BestPoint brute_force_best(const KernelShape& ks, bool has_use_shared_axis, bool staging_shared,
                           bool epilogue_fused, std::int64_t innermost_extent,
                           const HwParams& hw) {
  BestPoint best;
  best.time_us = std::numeric_limits<double>::infinity();
  best.feasible_count = 0;
  best.pruned_count = 0;

  const std::vector<int> use_shared_values =
      has_use_shared_axis ? std::vector<int>{0, 1} : std::vector<int>{0};
  for (int bt : kBlockThreads)
    for (int it : kItems)
      for (int un : kUnroll)
        for (int us : use_shared_values)
          for (int vw : kVec) {
            const Point p{bt, it, un, us, vw};
            if (violation_of(p, ks.element_bytes, innermost_extent, hw)) {
              ++best.pruned_count;
              continue;
            }
            ++best.feasible_count;
            const double t = time_of(p, ks, staging_shared, epilogue_fused, hw);
            const std::string id = p.id(has_use_shared_axis);
            if (t < best.time_us || (t == best.time_us && id < best.assignment_id)) {
              best.time_us = t;
              best.assignment_id = id;
            }
          }
  return best;
}

}  // namespace oracle
