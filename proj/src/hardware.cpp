// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/hardware.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kerntuner {

void HardwareSpec::validate() const {
  const bool ok = sm_count > 0 && max_threads_per_block > 0 && warp_size > 0 &&
                  shared_mem_per_block_bytes > 0 && registers_per_sm > 0 &&
                  max_warps_per_sm > 0 && peak_bandwidth_bytes_per_us > 0.0 &&
                  peak_flops_per_us > 0.0 && launch_overhead_us > 0.0 &&
                  max_threads_per_block % warp_size == 0;
  if (!ok) throw ConfigError("hardware spec '" + name + "' has invalid fields");
}

HardwareSpec default_hardware() { return HardwareSpec{}; }

std::string to_string(ConstraintTag t) {
  switch (t) {
    case ConstraintTag::THREADS_EXCEEDED: return "THREADS_EXCEEDED";
    case ConstraintTag::SHARED_EXCEEDED: return "SHARED_EXCEEDED";
    case ConstraintTag::REGISTERS_EXCEEDED: return "REGISTERS_EXCEEDED";
    case ConstraintTag::OCCUPANCY_FLOOR: return "OCCUPANCY_FLOOR";
    case ConstraintTag::ALIGNMENT: return "ALIGNMENT";
  }
  return "ALIGNMENT";
}

ConstraintTag constraint_tag_from_string(const std::string& s) {
  if (s == "THREADS_EXCEEDED") return ConstraintTag::THREADS_EXCEEDED;
  if (s == "SHARED_EXCEEDED") return ConstraintTag::SHARED_EXCEEDED;
  if (s == "REGISTERS_EXCEEDED") return ConstraintTag::REGISTERS_EXCEEDED;
  if (s == "OCCUPANCY_FLOOR") return ConstraintTag::OCCUPANCY_FLOOR;
  if (s == "ALIGNMENT") return ConstraintTag::ALIGNMENT;
  throw ConfigError("unknown constraint tag: " + s);
}

bool FeasibleSpace::contains(const std::string& assignment_id) const {
  for (const auto& a : assignments)
    if (a.id() == assignment_id) return true;
  return false;
}

ResourceUsage estimate_usage(const ConcreteKernel& kernel, const ShapeKey& key,
                             const HardwareSpec& hw) {
  const auto& a = kernel.assignment;
  const int block_threads = a.at("BLOCK_THREADS", 1);
  const int vec_width = a.at("VEC_WIDTH", 1);
  const int unroll = a.at("UNROLL", 1);
  const int items = a.at("ITEMS_PER_THREAD", 1);
  const int use_shared = a.at("USE_SHARED", 0);
  const int eb = element_bytes(key.dtype);

  ResourceUsage u;
  u.threads_per_block = block_threads;
  u.shared_bytes_per_block = use_shared * block_threads * vec_width * eb * 2;
  u.registers_per_thread = 24 + 4 * unroll + 2 * vec_width + 2 * items;

  const double warp_limit = static_cast<double>(hw.max_warps_per_sm) * hw.warp_size /
                            static_cast<double>(block_threads);
  const double register_limit =
      static_cast<double>(hw.registers_per_sm) /
      (static_cast<double>(u.registers_per_thread) * static_cast<double>(block_threads));
  const double shared_pool = 2.0 * hw.shared_mem_per_block_bytes;  // per-SM pool
  const double shared_limit = u.shared_bytes_per_block == 0
                                  ? std::numeric_limits<double>::infinity()
                                  : std::floor(shared_pool / u.shared_bytes_per_block);
  const double blocks_per_sm = std::floor(std::min({warp_limit, register_limit, shared_limit}));
  u.occupancy = std::min(1.0, blocks_per_sm * block_threads /
                                  (static_cast<double>(hw.max_warps_per_sm) * hw.warp_size));
  return u;
}

ConstraintReport check_constraints(const ResourceUsage& usage, const HardwareSpec& hw) {
  ConstraintReport r;
  if (usage.threads_per_block > hw.max_threads_per_block)
    r.violations.push_back(ConstraintTag::THREADS_EXCEEDED);
  if (usage.shared_bytes_per_block > hw.shared_mem_per_block_bytes)
    r.violations.push_back(ConstraintTag::SHARED_EXCEEDED);
  if (static_cast<long long>(usage.registers_per_thread) * usage.threads_per_block >
      hw.registers_per_sm)
    r.violations.push_back(ConstraintTag::REGISTERS_EXCEEDED);
  if (usage.occupancy < hw.occupancy_floor)
    r.violations.push_back(ConstraintTag::OCCUPANCY_FLOOR);
  r.pass = r.violations.empty();
  return r;
}

std::int64_t innermost_extent(const std::string& kernel_id, const ShapeKey& key) {
  (void)kernel_id;
  return key.dims.back();
}

FeasibleSpace derive_feasible_space(const KernelTemplate& tmpl, const ShapeKey& key,
                                    const HardwareSpec& hw) {
  shape_rule(builtin_kernel(tmpl.base_plan.kernel_id), key);  // key validity

  FeasibleSpace space;
  space.template_id = tmpl.template_id;
  space.hardware_name = hw.name;
  space.key = key;

  const std::int64_t extent = innermost_extent(tmpl.base_plan.kernel_id, key);
  for (auto& a : enumerate_assignments(tmpl)) {
    ConcreteKernel k = instantiate(tmpl, a);
    const ResourceUsage usage = estimate_usage(k, key, hw);
    const ConstraintReport rep = check_constraints(usage, hw);
    if (!rep.pass) {
      space.pruned.emplace_back(a.id(), rep.violations.front());
      continue;
    }
    if (extent % a.at("VEC_WIDTH", 1) != 0) {
      space.pruned.emplace_back(a.id(), ConstraintTag::ALIGNMENT);
      continue;
    }
    space.assignments.push_back(std::move(a));
  }

  if (space.assignments.empty())
    throw EmptySpace("no feasible assignment for " + tmpl.base_plan.kernel_id + " " +
                     key.label() + " on " + hw.name);
  return space;
}

}  // namespace kerntuner
