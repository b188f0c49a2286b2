// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kerntuner/hardware.hpp"
#include "kerntuner/kernel_template.hpp"
#include "kerntuner/kernels.hpp"

namespace kerntuner {

enum class BoundTag { memory_bound, compute_bound, launch_bound };

std::string to_string(BoundTag t);
BoundTag bound_tag_from_string(const std::string& s);

/// Profiling observations attached to a run. Minimal schema: the component
/// times are the raw (pre-occupancy) costs of the model.
struct SignalBundle {
  double mem_time_us = 0.0;
  double compute_time_us = 0.0;
  double occupancy = 1.0;
  double vec_eff = 1.0;
  BoundTag bound_tag = BoundTag::memory_bound;
  std::int64_t bytes_moved = 0;
  std::int64_t flops = 0;
};

struct RunResult {
  std::vector<Tensor> outputs;
  double time_us = 0.0;
  std::optional<SignalBundle> signals;  // absent-but-valid when a backend reports none
};

/// Exact traffic/op counts for one kernel at one shape, derived from the
/// plan structure. These feed the simulated timing model and the signals.
struct CostCounts {
  std::int64_t bytes_moved = 0;
  std::int64_t flops = 0;
};

/// Pinned counting rules (eb = element bytes):
///   silu_and_mul      bytes = eb*(2mn + mn)            flops = 8mn
///   fused_add_rmsnorm bytes = eb*(4mn + n)             flops = m*(5n + 5)
///   merge_attn_states bytes = eb*(3nhd + 3nh)          flops = nh*(17 + 4d)
/// An unfused epilogue spills and reloads the primary output once:
/// +2 * eb * (primary output elements).
CostCounts count_cost(const std::string& kernel_id, const ShapeKey& key, bool epilogue_fused);

/// Interpret `plan` on the case inputs. Elementwise arithmetic runs in fp64
/// (bit-identical to reference_eval for non-reduction kernels); row
/// reductions accumulate in fp32 in the plan's stated order, so tree and
/// sequential schemes differ in the last bits the way real kernels do.
/// Stores round to the case dtype. Plan mutations are honored — that is what
/// the correctness gate exists to catch.
std::vector<Tensor> run_plan(const ExecutionPlan& plan, const TestCase& cse);

/// Spec-facing wrapper: the assignment never influences output values.
std::vector<Tensor> run_reference(const ConcreteKernel& kernel, const TestCase& cse);

/// Pluggable execution backend. Implementations must be safe to call
/// concurrently unless stated otherwise (the external executor serializes
/// per device).
class Executor {
 public:
  virtual ~Executor() = default;

  /// One execution: outputs plus a single timing sample.
  virtual RunResult run(const ConcreteKernel& kernel, const TestCase& cse) = 0;

  /// Timing-only fast path; backends override when outputs are not needed.
  virtual double time_us(const ConcreteKernel& kernel, const TestCase& cse) {
    return run(kernel, cse).time_us;
  }

  /// Mean over the warmup/reps protocol. The default loops time_us();
  /// backends owning the protocol (external tools) override with a single
  /// invocation.
  virtual double measure_mean_us(const ConcreteKernel& kernel, const TestCase& cse, int warmup,
                                 int reps);

  virtual std::string device_id() const = 0;
};

/// Deterministic analytical device model:
///   vec_eff    = min(1, VEC_WIDTH*eb/16)
///   stage_eff  = 1.15 when USE_SHARED=1 on a shared_tile plan of a
///                row-reuse kernel, else 1.0
///   unroll_eff = min(1, 0.7 + 0.1*log2(UNROLL))
///   mem_time   = bytes / (peak_bandwidth * vec_eff * stage_eff)
///   comp_time  = flops / (peak_flops * unroll_eff)
///   time_us    = launch_overhead + max(mem_time, comp_time) / occupancy
/// Timing is a pure function of (plan, assignment, key, hw); outputs are the
/// plan interpreter's, bit-exact.
class SimulatedExecutor final : public Executor {
 public:
  explicit SimulatedExecutor(HardwareSpec hw) : hw_(std::move(hw)) {}

  RunResult run(const ConcreteKernel& kernel, const TestCase& cse) override;
  double time_us(const ConcreteKernel& kernel, const TestCase& cse) override;
  std::string device_id() const override { return "sim:" + hw_.name; }

  SignalBundle signals(const ConcreteKernel& kernel, const ShapeKey& key) const;
  const HardwareSpec& hardware() const { return hw_; }

 private:
  double model_time_us(const ConcreteKernel& kernel, const ShapeKey& key) const;

  HardwareSpec hw_;
};

/// Free-function forms of the two built-in backends.
RunResult run_simulated(const ConcreteKernel& kernel, const TestCase& cse, const HardwareSpec& hw);

}  // namespace kerntuner
