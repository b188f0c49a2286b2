// SPDX-License-Identifier: Apache-2.0
//
// Independent re-implementations of the documented resource and timing
// formulas, written against raw integers only. Tests compare these against
// the library's implementations; keep this file free of calls into
// estimate_usage / count_cost / SimulatedExecutor.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct HwParams {
  int max_threads_per_block;
  int warp_size;
  int shared_mem_per_block_bytes;
  int registers_per_sm;
  int max_warps_per_sm;
  double peak_bandwidth_bytes_per_us;
  double peak_flops_per_us;
  double launch_overhead_us;
  double occupancy_floor;
};

struct Point {
  int block_threads;
  int items_per_thread;
  int unroll;
  int use_shared;  // 0 when the kernel has no USE_SHARED axis
  int vec_width;

  std::string id(bool has_use_shared_axis) const;
};

struct Usage {
  int shared_bytes;
  int registers_per_thread;
  double occupancy;
};

Usage usage_of(const Point& p, int element_bytes, const HwParams& hw);

/// Empty when feasible; otherwise the first violated constraint in the
/// canonical order THREADS, SHARED, REGISTERS, OCCUPANCY_FLOOR, ALIGNMENT.
std::optional<std::string> violation_of(const Point& p, int element_bytes,
                                        std::int64_t innermost_extent, const HwParams& hw);

struct KernelShape {
  std::string kernel_id;           // silu_and_mul | fused_add_rmsnorm | merge_attn_states
  std::vector<std::int64_t> dims;  // (m,n) or (n,h,d)
  int element_bytes;
};

std::int64_t bytes_of(const KernelShape& ks, bool epilogue_fused);
std::int64_t flops_of(const KernelShape& ks);

double time_of(const Point& p, const KernelShape& ks, bool staging_shared, bool epilogue_fused,
               const HwParams& hw);

struct BestPoint {
  std::string assignment_id;
  double time_us;
  std::size_t feasible_count;
  std::size_t pruned_count;
};

/// Brute force over the full five-axis (or four-axis) candidate grid:
/// minimal time among feasible points, ties to the lexicographically
/// smaller assignment id.
BestPoint brute_force_best(const KernelShape& ks, bool has_use_shared_axis, bool staging_shared,
                           bool epilogue_fused, std::int64_t innermost_extent, const HwParams& hw);

}  // namespace oracle
