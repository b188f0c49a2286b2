// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <set>

#include "helpers.hpp"
#include "kerntuner/rng.hpp"

using namespace kerntuner;
using kt_test::oracle_params;

namespace {

ConcreteKernel bind(const KernelTemplate& t, std::map<std::string, int> values) {
  ParamAssignment a;
  a.values = std::move(values);
  return instantiate(t, a);
}

HardwareSpec random_hardware(std::uint64_t seed) {
  const CounterRng rng(seed, "hw", 0);
  HardwareSpec hw;
  hw.name = "random-" + std::to_string(seed);
  hw.sm_count = 16 + static_cast<int>(rng.bits(0) % 112);
  const int threads_options[] = {128, 256, 512, 1024};
  hw.max_threads_per_block = threads_options[rng.bits(1) % 4];
  hw.warp_size = 32;
  hw.shared_mem_per_block_bytes = 16384 + static_cast<int>(rng.bits(2) % 147456);
  hw.registers_per_sm = 32768 + static_cast<int>(rng.bits(3) % 229376);
  const int warps_options[] = {16, 32, 48, 64};
  hw.max_warps_per_sm = warps_options[rng.bits(4) % 4];
  hw.peak_bandwidth_bytes_per_us = 100000.0 + static_cast<double>(rng.bits(5) % 900000);
  hw.peak_flops_per_us = 1000000.0 + static_cast<double>(rng.bits(6) % 30000000);
  hw.launch_overhead_us = 0.5 + static_cast<double>(rng.bits(7) % 100) / 10.0;
  return hw;
}

}  // namespace

TEST_CASE("estimate_usage matches the documented formulas") {
  const auto hw = default_hardware();
  const auto t = templatize(default_plan("fused_add_rmsnorm"));
  const ShapeKey key{{128, 4096}, DType::fp32};

  SUBCASE("shared bytes at the big end") {
    const auto u = estimate_usage(bind(t, {{"BLOCK_THREADS", 1024},
                                           {"ITEMS_PER_THREAD", 1},
                                           {"UNROLL", 1},
                                           {"USE_SHARED", 1},
                                           {"VEC_WIDTH", 8}}),
                                  key, hw);
    CHECK(u.shared_bytes_per_block == 1024 * 8 * 4 * 2);  // 65536
  }

  SUBCASE("USE_SHARED=0 means no shared allocation") {
    const auto u = estimate_usage(bind(t, {{"BLOCK_THREADS", 1024},
                                           {"ITEMS_PER_THREAD", 1},
                                           {"UNROLL", 1},
                                           {"USE_SHARED", 0},
                                           {"VEC_WIDTH", 8}}),
                                  key, hw);
    CHECK(u.shared_bytes_per_block == 0);
  }

  SUBCASE("register base is 32 at all-minimum") {
    const auto u = estimate_usage(bind(t, {{"BLOCK_THREADS", 32},
                                           {"ITEMS_PER_THREAD", 1},
                                           {"UNROLL", 1},
                                           {"USE_SHARED", 0},
                                           {"VEC_WIDTH", 1}}),
                                  key, hw);
    CHECK(u.registers_per_thread == 32);
    CHECK(u.occupancy == 1.0);
  }
}

TEST_CASE("check_constraints tags") {
  const auto hw = default_hardware();

  SUBCASE("boundary is inclusive") {
    ResourceUsage u{1024, 0, 32, 1.0};
    CHECK(check_constraints(u, hw).pass);
  }
  SUBCASE("threads exceeded") {
    ResourceUsage u{2048, 0, 32, 1.0};
    const auto r = check_constraints(u, hw);
    CHECK_FALSE(r.pass);
    CHECK(r.violations.front() == ConstraintTag::THREADS_EXCEEDED);
  }
  SUBCASE("shared exceeded") {
    ResourceUsage u{256, 65536, 32, 1.0};
    const auto r = check_constraints(u, hw);
    CHECK_FALSE(r.pass);
    CHECK(r.violations.front() == ConstraintTag::SHARED_EXCEEDED);
  }
  SUBCASE("occupancy floor") {
    ResourceUsage u{256, 0, 32, 0.1};
    const auto r = check_constraints(u, hw);
    CHECK_FALSE(r.pass);
    CHECK(r.violations.front() == ConstraintTag::OCCUPANCY_FLOOR);
  }
}

TEST_CASE("derive_feasible_space partitions the space and agrees with the oracle") {
  const auto hw = default_hardware();
  const auto t = templatize(default_plan("fused_add_rmsnorm"));
  const ShapeKey key{{128, 4096}, DType::fp32};
  const auto space = derive_feasible_space(t, key, hw);

  CHECK(space.assignments.size() + space.pruned.size() == 960);
  CHECK(space.template_id == t.template_id);

  // soundness: oracle agrees on every point
  const auto hp = oracle_params(hw);
  std::set<std::string> feasible_ids;
  for (const auto& a : space.assignments) {
    feasible_ids.insert(a.id());
    const oracle::Point p{a.values.at("BLOCK_THREADS"), a.values.at("ITEMS_PER_THREAD"),
                          a.values.at("UNROLL"), a.values.at("USE_SHARED"),
                          a.values.at("VEC_WIDTH")};
    CHECK_FALSE(oracle::violation_of(p, 4, 4096, hp).has_value());
  }
  for (const auto& [id, tag] : space.pruned) {
    CHECK_FALSE(feasible_ids.count(id));
    const auto a = parse_assignment(id);
    const oracle::Point p{a.values.at("BLOCK_THREADS"), a.values.at("ITEMS_PER_THREAD"),
                          a.values.at("UNROLL"), a.values.at("USE_SHARED"),
                          a.values.at("VEC_WIDTH")};
    const auto violation = oracle::violation_of(p, 4, 4096, hp);
    REQUIRE(violation.has_value());
    CHECK(*violation == to_string(tag));
  }
}

TEST_CASE("alignment pruning follows the innermost extent") {
  const auto hw = default_hardware();
  const auto t = templatize(default_plan("silu_and_mul"));

  SUBCASE("4096 is divisible by every vector width") {
    const auto space = derive_feasible_space(t, {{16, 4096}, DType::fp16}, hw);
    for (const auto& [id, tag] : space.pruned) CHECK(tag != ConstraintTag::ALIGNMENT);
  }

  SUBCASE("extent 4100 prunes VEC_WIDTH=8 but keeps 4") {
    const auto space = derive_feasible_space(t, {{16, 4100}, DType::fp16}, hw);
    bool saw_alignment = false;
    for (const auto& [id, tag] : space.pruned) {
      if (tag != ConstraintTag::ALIGNMENT) continue;
      saw_alignment = true;
      CHECK(parse_assignment(id).values.at("VEC_WIDTH") == 8);
    }
    CHECK(saw_alignment);
    bool vec4_feasible = false;
    for (const auto& a : space.assignments)
      vec4_feasible = vec4_feasible || a.values.at("VEC_WIDTH") == 4;
    CHECK(vec4_feasible);
  }
}

TEST_CASE("tiny device prunes all large blocks; shrinking to nothing raises") {
  auto hw = default_hardware();
  hw.max_threads_per_block = 64;
  const auto t = templatize(default_plan("silu_and_mul"));
  const auto space = derive_feasible_space(t, {{16, 4096}, DType::fp16}, hw);
  for (const auto& a : space.assignments) CHECK(a.values.at("BLOCK_THREADS") <= 64);

  hw.max_threads_per_block = 32;
  hw.registers_per_sm = 1;  // nothing can launch
  CHECK_THROWS_AS(derive_feasible_space(t, {{16, 4096}, DType::fp16}, hw), EmptySpace);
}

TEST_CASE("enlarging the resource upper bounds never shrinks the feasible set") {
  const auto t = templatize(default_plan("fused_add_rmsnorm"));
  const ShapeKey key{{64, 1000}, DType::fp32};  // 1000 exercises alignment too
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const HardwareSpec small = random_hardware(seed);
    HardwareSpec big = small;
    big.max_threads_per_block *= 2;
    big.shared_mem_per_block_bytes *= 2;
    big.registers_per_sm *= 2;

    std::set<std::string> small_ids, big_ids;
    try {
      for (const auto& a : derive_feasible_space(t, key, small).assignments)
        small_ids.insert(a.id());
    } catch (const EmptySpace&) {
    }
    for (const auto& a : derive_feasible_space(t, key, big).assignments) big_ids.insert(a.id());
    for (const auto& id : small_ids) CHECK(big_ids.count(id) == 1);
  }
}
