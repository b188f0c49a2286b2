// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kerntuner/kernel_template.hpp"
#include "kerntuner/kernels.hpp"

namespace kerntuner {

/// Resource upper-bound vector of the target device. Values come from a
/// config file; the built-in default is a TITAN-RTX-like calibration.
struct HardwareSpec {
  std::string name = "titan-rtx-like";
  int sm_count = 72;
  int max_threads_per_block = 1024;
  int warp_size = 32;
  int shared_mem_per_block_bytes = 49152;
  int registers_per_sm = 65536;
  int max_warps_per_sm = 32;
  double peak_bandwidth_bytes_per_us = 672000.0;  // 672 GB/s
  double peak_flops_per_us = 16300000.0;          // ~16.3 TFLOP/s fp32
  double launch_overhead_us = 3.0;
  double occupancy_floor = 0.125;

  void validate() const;  // throws ConfigError on nonsense values
};

HardwareSpec default_hardware();

struct ResourceUsage {
  int threads_per_block = 0;
  int shared_bytes_per_block = 0;
  int registers_per_thread = 0;
  double occupancy = 0.0;
};

enum class ConstraintTag {
  THREADS_EXCEEDED,
  SHARED_EXCEEDED,
  REGISTERS_EXCEEDED,
  OCCUPANCY_FLOOR,
  ALIGNMENT,
};

std::string to_string(ConstraintTag t);
ConstraintTag constraint_tag_from_string(const std::string& s);

struct ConstraintReport {
  bool pass = true;
  std::vector<ConstraintTag> violations;
};

/// The per-(template, shape) partition of the candidate space into feasible
/// assignments and pruned ones (each with the first violated constraint).
struct FeasibleSpace {
  std::string template_id;
  std::string hardware_name;
  ShapeKey key;
  std::vector<ParamAssignment> assignments;
  std::vector<std::pair<std::string, ConstraintTag>> pruned;  // (assignment_id, reason)

  bool contains(const std::string& assignment_id) const;
};

/// Deterministic resource estimate for one bound kernel:
///   shared_bytes        = USE_SHARED * BLOCK_THREADS * VEC_WIDTH * element_bytes * 2
///   registers_per_thread = 24 + 4*UNROLL + 2*VEC_WIDTH + 2*ITEMS_PER_THREAD
///   occupancy            = min(1, floor(min(warp_limit, register_limit, shared_limit))
///                            * BLOCK_THREADS / (max_warps_per_sm * warp_size))
/// where the per-SM shared pool is 2 * shared_mem_per_block_bytes.
ResourceUsage estimate_usage(const ConcreteKernel& kernel, const ShapeKey& key,
                             const HardwareSpec& hw);

ConstraintReport check_constraints(const ResourceUsage& usage, const HardwareSpec& hw);

/// The contiguous innermost extent that vector loads must divide: the last
/// key dim (n for the 2-d kernels including both silu halves, d for merges).
std::int64_t innermost_extent(const std::string& kernel_id, const ShapeKey& key);

/// Partition the full enumeration of `tmpl` for shape `key` on `hw`.
/// Resource checks run first; the VEC_WIDTH alignment rule prunes what
/// remains. Throws EmptySpace when nothing survives.
FeasibleSpace derive_feasible_space(const KernelTemplate& tmpl, const ShapeKey& key,
                                    const HardwareSpec& hw);

}  // namespace kerntuner
