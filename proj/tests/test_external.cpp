// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "helpers.hpp"
#include "kerntuner/external_executor.hpp"
#include "kerntuner/json_io.hpp"

using namespace kerntuner;

namespace {

ConcreteKernel tiny_kernel() {
  const auto t = templatize(default_plan("silu_and_mul"));
  ParamAssignment a;
  for (const auto& d : t.params) a.values[d.name] = d.candidates.front();
  return instantiate(t, a);
}

TestCase tiny_case() {
  return generate_tests(builtin_kernel("silu_and_mul"), {{{1, 1}, DType::fp32}}, 0).cases[0];
}

std::string reply_command(const json& reply) {
  return "cat > /dev/null; printf '%s' '" + reply.dump() + "'";
}

}  // namespace

TEST_CASE("external executor protocol") {
  ExternalExecSpec spec;
  spec.timeout_ms = 5000;

  SUBCASE("well-formed reply round-trips") {
    Tensor out({1, 1}, DType::fp32);
    out.data[0] = 2.5f;
    const json reply = {{"time_us", 199.15}, {"outputs", json::array({to_json(out)})}};
    spec.command = reply_command(reply);
    const auto result = run_external(spec, tiny_kernel(), tiny_case());
    CHECK(result.time_us == 199.15);
    REQUIRE(result.outputs.size() == 1);
    CHECK(result.outputs[0].data[0] == 2.5f);
    CHECK_FALSE(result.signals.has_value());  // absent but valid
  }

  SUBCASE("signals parsed when reported") {
    Tensor out({1, 1}, DType::fp32);
    const json reply = {{"time_us", 10.0},
                        {"outputs", json::array({to_json(out)})},
                        {"signals",
                         {{"mem_time_us", 4.0},
                          {"compute_time_us", 1.0},
                          {"occupancy", 0.5},
                          {"bound_tag", "memory_bound"},
                          {"bytes_moved", 1024},
                          {"flops", 64}}}};
    spec.command = reply_command(reply);
    const auto result = run_external(spec, tiny_kernel(), tiny_case());
    REQUIRE(result.signals.has_value());
    CHECK(result.signals->occupancy == 0.5);
  }

  SUBCASE("reply missing outputs") {
    spec.command = reply_command(json{{"time_us", 5.0}});
    CHECK_THROWS_AS(run_external(spec, tiny_kernel(), tiny_case()), ProtocolParseError);
  }

  SUBCASE("reply that is not JSON") {
    spec.command = "cat > /dev/null; echo not-json";
    CHECK_THROWS_AS(run_external(spec, tiny_kernel(), tiny_case()), ProtocolParseError);
  }

  SUBCASE("non-zero exit carries output") {
    spec.command = "cat > /dev/null; echo oops >&2; exit 3";
    try {
      run_external(spec, tiny_kernel(), tiny_case());
      FAIL("expected ExecNonZeroExit");
    } catch (const ExecNonZeroExit& e) {
      CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
  }

  SUBCASE("timeout kills the tool") {
    spec.command = "sleep 5";
    spec.timeout_ms = 200;
    CHECK_THROWS_AS(run_external(spec, tiny_kernel(), tiny_case()), ExecTimeout);
  }

  SUBCASE("request carries the protocol and kernel identity") {
    // bounce the request back through stderr-free jq-less shell: capture into a file
    spec.command = "tee /tmp/kt_req.json > /dev/null; printf '%s' '" +
                   json{{"time_us", 1.0},
                        {"outputs", json::array({to_json(Tensor({1, 1}, DType::fp32))})}}
                       .dump() +
                   "'";
    ExternalExecutor exec(spec);
    (void)exec.measure_mean_us(tiny_kernel(), tiny_case(), 20, 100);
    const json request = json::parse(read_text_file("/tmp/kt_req.json"));
    CHECK(request.at("warmup") == 20);
    CHECK(request.at("reps") == 100);
    CHECK(request.at("kernel_id") == "silu_and_mul");
    CHECK(request.contains("plan"));
    CHECK(request.contains("assignment"));
  }
}

TEST_CASE("command rewrite provider") {
  const auto plan = default_plan("fused_add_rmsnorm");
  const Suggestion g{Directive::enable_shared_staging, "test"};
  const SignalBundle signals;
  const auto hw = default_hardware();

  SUBCASE("valid reply is adopted") {
    auto rewritten = plan;
    rewritten.staging = Staging::shared_tile;
    rewritten.plan_version = plan.plan_version + 1;
    const json reply = {{"plan", to_json(rewritten)}};
    CommandProvider provider("cat > /dev/null; printf '%s' '" + reply.dump() + "'", 5000);
    const auto got = provider.rewrite(plan, g, signals, hw);
    CHECK(got.staging == Staging::shared_tile);
    CHECK(got.plan_version == 1);
  }

  SUBCASE("malformed reply") {
    CommandProvider provider("cat > /dev/null; echo '{\"nope\": 1}'", 5000);
    CHECK_THROWS_AS(provider.rewrite(plan, g, signals, hw), ProviderMalformedReply);
  }

  SUBCASE("timeout") {
    CommandProvider provider("sleep 5", 200);
    CHECK_THROWS_AS(provider.rewrite(plan, g, signals, hw), ProviderTimeout);
  }
}
