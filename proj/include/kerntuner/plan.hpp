// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kerntuner/errors.hpp"

namespace kerntuner {

enum class GridMapping { row_per_block, flat_elementwise, tile_2d };
enum class Staging { direct, shared_tile };
enum class ReductionScheme { none, sequential, tree };
enum class LoopOrder { natural, reversed };

/// Deliberate semantic faults for exercising the correctness gate. A rewrite
/// provider under test can return a plan carrying one of these; the gate must
/// reject it and the campaign must roll back.
enum class PlanMutation { none, drop_eps, swap_mul_operands, skip_renormalization, break_epilogue };

/// The rewritable description of HOW a kernel computes: grid mapping,
/// staging, loop/reduction structure. Semantics-preserving rewrites edit
/// these fields and bump plan_version; tunable numeric parameters live in
/// KernelTemplate instead and get embedded via `resolved_params`.
struct ExecutionPlan {
  std::string kernel_id;
  GridMapping grid_mapping = GridMapping::flat_elementwise;
  Staging staging = Staging::direct;
  ReductionScheme reduction = ReductionScheme::none;
  LoopOrder loop_order = LoopOrder::natural;
  bool epilogue_fused = true;
  int plan_version = 0;
  PlanMutation mutation = PlanMutation::none;
  std::map<std::string, int> resolved_params;  // filled by instantiate()

  bool operator==(const ExecutionPlan&) const = default;

  /// Canonical one-line description; also the hash input for template ids.
  std::string canonical() const;

  /// Fields that decide output values (kernel, reduction order, mutation).
  /// Plans with equal fingerprints produce bit-identical outputs.
  std::string semantic_fingerprint() const;
};

std::string to_string(GridMapping g);
std::string to_string(Staging s);
std::string to_string(ReductionScheme r);
std::string to_string(LoopOrder l);
std::string to_string(PlanMutation m);

GridMapping grid_mapping_from_string(const std::string& s);
Staging staging_from_string(const std::string& s);
ReductionScheme reduction_from_string(const std::string& s);
LoopOrder loop_order_from_string(const std::string& s);
PlanMutation mutation_from_string(const std::string& s);

/// True when the kernel re-reads each row (rmsnorm reads the fused row once
/// for the square sum and once for the normalize), i.e. shared staging can
/// pay off.
bool kernel_has_row_reuse(const std::string& kernel_id);

/// True when the kernel contains a row reduction (only fused_add_rmsnorm).
bool kernel_has_reduction(const std::string& kernel_id);

/// Grid mappings that are structurally valid for the kernel, in cycle order.
std::vector<GridMapping> valid_grid_mappings(const std::string& kernel_id);

/// The untuned starting plan for a built-in kernel.
ExecutionPlan default_plan(const std::string& kernel_id);

}  // namespace kerntuner
