// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/plan.hpp"

#include <sstream>

namespace kerntuner {

std::string to_string(GridMapping g) {
  switch (g) {
    case GridMapping::row_per_block: return "row_per_block";
    case GridMapping::flat_elementwise: return "flat_elementwise";
    case GridMapping::tile_2d: return "tile_2d";
  }
  return "flat_elementwise";
}

std::string to_string(Staging s) {
  return s == Staging::shared_tile ? "shared_tile" : "direct";
}

std::string to_string(ReductionScheme r) {
  switch (r) {
    case ReductionScheme::none: return "none";
    case ReductionScheme::sequential: return "sequential";
    case ReductionScheme::tree: return "tree";
  }
  return "none";
}

std::string to_string(LoopOrder l) {
  return l == LoopOrder::reversed ? "reversed" : "natural";
}

std::string to_string(PlanMutation m) {
  switch (m) {
    case PlanMutation::none: return "none";
    case PlanMutation::drop_eps: return "drop_eps";
    case PlanMutation::swap_mul_operands: return "swap_mul_operands";
    case PlanMutation::skip_renormalization: return "skip_renormalization";
    case PlanMutation::break_epilogue: return "break_epilogue";
  }
  return "none";
}

GridMapping grid_mapping_from_string(const std::string& s) {
  if (s == "row_per_block") return GridMapping::row_per_block;
  if (s == "flat_elementwise") return GridMapping::flat_elementwise;
  if (s == "tile_2d") return GridMapping::tile_2d;
  throw ConfigError("unknown grid_mapping: " + s);
}

Staging staging_from_string(const std::string& s) {
  if (s == "direct") return Staging::direct;
  if (s == "shared_tile") return Staging::shared_tile;
  throw ConfigError("unknown staging: " + s);
}

ReductionScheme reduction_from_string(const std::string& s) {
  if (s == "none") return ReductionScheme::none;
  if (s == "sequential") return ReductionScheme::sequential;
  if (s == "tree") return ReductionScheme::tree;
  throw ConfigError("unknown reduction: " + s);
}

LoopOrder loop_order_from_string(const std::string& s) {
  if (s == "natural") return LoopOrder::natural;
  if (s == "reversed") return LoopOrder::reversed;
  throw ConfigError("unknown loop_order: " + s);
}

PlanMutation mutation_from_string(const std::string& s) {
  if (s == "none") return PlanMutation::none;
  if (s == "drop_eps") return PlanMutation::drop_eps;
  if (s == "swap_mul_operands") return PlanMutation::swap_mul_operands;
  if (s == "skip_renormalization") return PlanMutation::skip_renormalization;
  if (s == "break_epilogue") return PlanMutation::break_epilogue;
  throw ConfigError("unknown mutation: " + s);
}

std::string ExecutionPlan::canonical() const {
  std::ostringstream os;
  os << "kernel=" << kernel_id << ";grid=" << to_string(grid_mapping)
     << ";staging=" << to_string(staging) << ";reduction=" << to_string(reduction)
     << ";loop=" << to_string(loop_order) << ";epilogue=" << (epilogue_fused ? 1 : 0)
     << ";mutation=" << to_string(mutation) << ";version=" << plan_version;
  for (const auto& [name, value] : resolved_params) os << ";" << name << "=" << value;
  return os.str();
}

std::string ExecutionPlan::semantic_fingerprint() const {
  return kernel_id + "|" + to_string(reduction) + "|" + to_string(mutation);
}

bool kernel_has_row_reuse(const std::string& kernel_id) {
  return kernel_id == "fused_add_rmsnorm";
}

bool kernel_has_reduction(const std::string& kernel_id) {
  return kernel_id == "fused_add_rmsnorm";
}

std::vector<GridMapping> valid_grid_mappings(const std::string& kernel_id) {
  if (kernel_id == "fused_add_rmsnorm") {
    // the row reduction needs row locality
    return {GridMapping::row_per_block, GridMapping::tile_2d};
  }
  return {GridMapping::flat_elementwise, GridMapping::row_per_block, GridMapping::tile_2d};
}

ExecutionPlan default_plan(const std::string& kernel_id) {
  ExecutionPlan p;
  p.kernel_id = kernel_id;
  if (kernel_id == "silu_and_mul") {
    p.grid_mapping = GridMapping::flat_elementwise;
  } else if (kernel_id == "fused_add_rmsnorm") {
    p.grid_mapping = GridMapping::row_per_block;
    p.reduction = ReductionScheme::sequential;
  } else if (kernel_id == "merge_attn_states") {
    p.grid_mapping = GridMapping::row_per_block;
  } else {
    throw UnknownKernel("unknown kernel: " + kernel_id);
  }
  return p;
}

}  // namespace kerntuner
