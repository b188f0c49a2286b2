// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "kerntuner/kernel_template.hpp"

using namespace kerntuner;

TEST_CASE("templatize emits the descriptor set the plan calls for") {
  SUBCASE("elementwise silu: four axes, staging fixed to direct") {
    const auto t = templatize(default_plan("silu_and_mul"));
    CHECK(t.params.size() == 4);
    CHECK(t.find("USE_SHARED") == nullptr);
    CHECK(t.find("BLOCK_THREADS") != nullptr);
    CHECK(t.find("VEC_WIDTH") != nullptr);
  }

  SUBCASE("row-reuse rmsnorm: five axes including USE_SHARED") {
    const auto t = templatize(default_plan("fused_add_rmsnorm"));
    CHECK(t.params.size() == 5);
    REQUIRE(t.find("USE_SHARED") != nullptr);
    CHECK(t.find("USE_SHARED")->candidates == std::vector<int>{0, 1});
  }

  SUBCASE("deterministic template ids") {
    const auto a = templatize(default_plan("fused_add_rmsnorm"));
    const auto b = templatize(default_plan("fused_add_rmsnorm"));
    CHECK(a.template_id == b.template_id);
    auto rewritten = default_plan("fused_add_rmsnorm");
    rewritten.staging = Staging::shared_tile;
    CHECK(templatize(rewritten).template_id != a.template_id);
  }

  SUBCASE("unknown kernel rejected") {
    ExecutionPlan p;
    p.kernel_id = "conv9000";
    CHECK_THROWS_AS(templatize(p), UnknownKernel);
  }
}

TEST_CASE("instantiate embeds values and never clamps") {
  const auto t = templatize(default_plan("silu_and_mul"));
  ParamAssignment a;
  a.values = {{"BLOCK_THREADS", 256}, {"ITEMS_PER_THREAD", 4}, {"UNROLL", 2}, {"VEC_WIDTH", 4}};

  SUBCASE("values visible in the resolved plan") {
    const auto k = instantiate(t, a);
    CHECK(k.plan.resolved_params.at("BLOCK_THREADS") == 256);
    CHECK(k.plan.resolved_params.at("VEC_WIDTH") == 4);
    CHECK(k.template_id == t.template_id);
    // nothing but the embedding changed
    auto expected = t.base_plan;
    expected.resolved_params = a.values;
    CHECK(k.plan == expected);
  }

  SUBCASE("value outside candidates") {
    auto bad = a;
    bad.values["VEC_WIDTH"] = 3;
    CHECK_THROWS_AS(instantiate(t, bad), ValueNotInCandidates);
  }

  SUBCASE("missing parameter") {
    auto bad = a;
    bad.values.erase("UNROLL");
    CHECK_THROWS_AS(instantiate(t, bad), MissingParam);
  }

  SUBCASE("unknown parameter") {
    auto bad = a;
    bad.values["USE_SHARED"] = 1;  // silu template has no such axis
    CHECK_THROWS_AS(instantiate(t, bad), UnknownParam);
  }
}

TEST_CASE("enumerate_assignments is the exact sorted Cartesian product") {
  SUBCASE("five axes sized (6,5,4,4,2) give 960 points") {
    const auto t = templatize(default_plan("fused_add_rmsnorm"));
    const auto all = enumerate_assignments(t);
    CHECK(all.size() == 960);

    std::set<std::string> ids;
    for (const auto& a : all) ids.insert(a.id());
    CHECK(ids.size() == all.size());  // duplicate-free

    // lexicographic as value tuples over the sorted param names
    auto tuple_of = [&](const ParamAssignment& a) {
      std::vector<int> v;
      for (const auto& d : t.params) v.push_back(a.values.at(d.name));
      return v;
    };
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(tuple_of(all[i - 1]) < tuple_of(all[i]));
  }

  SUBCASE("four-axis silu template gives 480") {
    CHECK(enumerate_assignments(templatize(default_plan("silu_and_mul"))).size() == 480);
  }

  SUBCASE("single-candidate descriptor") {
    KernelTemplate t;
    t.base_plan = default_plan("silu_and_mul");
    t.params = {{"BLOCK_THREADS", {1}}};
    CHECK(enumerate_assignments(t).size() == 1);
  }

  SUBCASE("assignment ids round-trip through parse") {
    const auto t = templatize(default_plan("fused_add_rmsnorm"));
    for (const auto& a : enumerate_assignments(t)) {
      const auto parsed = parse_assignment(a.id());
      CHECK(parsed.values == a.values);
    }
  }
}

TEST_CASE("assignment parsing rejects junk") {
  CHECK_THROWS_AS(parse_assignment(""), ConfigError);
  CHECK_THROWS_AS(parse_assignment("BLOCK_THREADS"), ConfigError);
  CHECK_THROWS_AS(parse_assignment("=3"), ConfigError);
  CHECK_THROWS_AS(parse_assignment("VEC_WIDTH=abc"), ConfigError);
  const auto a = parse_assignment("VEC_WIDTH=4,BLOCK_THREADS=64");
  CHECK(a.id() == "BLOCK_THREADS=64,VEC_WIDTH=4");  // canonicalized order
}
