// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/executor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kerntuner {

std::string to_string(BoundTag t) {
  switch (t) {
    case BoundTag::memory_bound: return "memory_bound";
    case BoundTag::compute_bound: return "compute_bound";
    case BoundTag::launch_bound: return "launch_bound";
  }
  return "memory_bound";
}

BoundTag bound_tag_from_string(const std::string& s) {
  if (s == "memory_bound") return BoundTag::memory_bound;
  if (s == "compute_bound") return BoundTag::compute_bound;
  if (s == "launch_bound") return BoundTag::launch_bound;
  throw ConfigError("unknown bound tag: " + s);
}

CostCounts count_cost(const std::string& kernel_id, const ShapeKey& key, bool epilogue_fused) {
  const std::int64_t eb = element_bytes(key.dtype);
  CostCounts c;
  std::int64_t primary_out_elems = 0;
  if (kernel_id == "silu_and_mul") {
    const auto m = key.dims[0], n = key.dims[1];
    c.bytes_moved = eb * (2 * m * n + m * n);
    c.flops = 8 * m * n;
    primary_out_elems = m * n;
  } else if (kernel_id == "fused_add_rmsnorm") {
    const auto m = key.dims[0], n = key.dims[1];
    c.bytes_moved = eb * (4 * m * n + n);
    c.flops = m * (5 * n + 5);
    primary_out_elems = m * n;
  } else if (kernel_id == "merge_attn_states") {
    const auto n = key.dims[0], h = key.dims[1], d = key.dims[2];
    c.bytes_moved = eb * (3 * n * h * d + 3 * n * h);
    c.flops = n * h * (17 + 4 * d);
    primary_out_elems = n * h * d;
  } else {
    throw UnknownKernel("count_cost: unknown kernel " + kernel_id);
  }
  if (!epilogue_fused) c.bytes_moved += 2 * eb * primary_out_elems;
  return c;
}

namespace {

void validate_plan_structure(const ExecutionPlan& plan) {
  if (!is_builtin_kernel(plan.kernel_id))
    throw UnknownKernel("run_plan: unknown kernel " + plan.kernel_id);

  const bool has_reduction = kernel_has_reduction(plan.kernel_id);
  if (has_reduction && plan.reduction == ReductionScheme::none)
    throw PlanInvalid(plan.kernel_id + ": reduction kernel needs a reduction scheme");
  if (!has_reduction && plan.reduction != ReductionScheme::none)
    throw PlanInvalid(plan.kernel_id + ": reduction scheme on a kernel without a reduction");

  const auto valid = valid_grid_mappings(plan.kernel_id);
  if (std::find(valid.begin(), valid.end(), plan.grid_mapping) == valid.end())
    throw PlanInvalid(plan.kernel_id + ": grid mapping " + to_string(plan.grid_mapping) +
                      " not valid for this kernel");
  if (plan.staging == Staging::shared_tile && !kernel_has_row_reuse(plan.kernel_id))
    throw PlanInvalid(plan.kernel_id + ": shared staging without row reuse");
}

// fp32 accumulation in the plan's stated order
float reduce_terms(std::vector<float>& terms, ReductionScheme scheme) {
  if (scheme == ReductionScheme::sequential) {
    float acc = 0.0f;
    for (float t : terms) acc += t;
    return acc;
  }
  // tree: pad to the next power of two with the additive identity
  std::size_t p = 1;
  while (p < terms.size()) p <<= 1;
  terms.resize(p, 0.0f);
  for (std::size_t width = p; width > 1; width >>= 1)
    for (std::size_t i = 0; i < width / 2; ++i) terms[i] = terms[2 * i] + terms[2 * i + 1];
  return terms.empty() ? 0.0f : terms[0];
}

void check_case_inputs(const KernelSpec& spec, const TestCase& cse) {
  const auto io = shape_rule(spec, cse.key);
  if (cse.inputs.size() != io.inputs.size())
    throw ShapeMismatch(spec.kernel_id + ": case input count mismatch");
  for (std::size_t i = 0; i < cse.inputs.size(); ++i) {
    if (cse.inputs[i].shape != io.inputs[i] || cse.inputs[i].dtype != cse.key.dtype)
      throw ShapeMismatch(spec.kernel_id + ": case input " + std::to_string(i) +
                          " does not conform to the shape rule");
  }
}

// Row traversal order. Grid mapping and loop order only reorder independent
// work; reduction order within a row is fixed by the reduction scheme.
template <typename Fn>
void for_each_row(const ExecutionPlan& plan, std::int64_t rows, Fn&& fn) {
  constexpr std::int64_t kTileRows = 32;
  if (plan.grid_mapping == GridMapping::tile_2d) {
    for (std::int64_t t0 = 0; t0 < rows; t0 += kTileRows) {
      const std::int64_t hi = std::min(rows, t0 + kTileRows);
      if (plan.loop_order == LoopOrder::reversed)
        for (std::int64_t i = hi - 1; i >= t0; --i) fn(i);
      else
        for (std::int64_t i = t0; i < hi; ++i) fn(i);
    }
    return;
  }
  if (plan.loop_order == LoopOrder::reversed) {
    for (std::int64_t i = rows - 1; i >= 0; --i) fn(i);
  } else {
    for (std::int64_t i = 0; i < rows; ++i) fn(i);
  }
}

}  // namespace

std::vector<Tensor> run_plan(const ExecutionPlan& plan, const TestCase& cse) {
  validate_plan_structure(plan);
  const KernelSpec spec = builtin_kernel(plan.kernel_id);
  check_case_inputs(spec, cse);

  const DType dt = cse.key.dtype;

  if (plan.kernel_id == "silu_and_mul") {
    const auto m = cse.key.dims[0], n = cse.key.dims[1];
    const Tensor& x = cse.inputs[0];
    const bool swap = plan.mutation == PlanMutation::swap_mul_operands;
    const bool broken_epilogue = plan.mutation == PlanMutation::break_epilogue;
    Tensor out({m, n}, dt);
    for_each_row(plan, m, [&](std::int64_t i) {
      for (std::int64_t j = 0; j < n; ++j) {
        const double first = x.data[static_cast<std::size_t>(i * 2 * n + j)];
        const double second = x.data[static_cast<std::size_t>(i * 2 * n + n + j)];
        const double gate = swap ? second : first;
        const double up = swap ? first : second;
        const double silu = gate * (1.0 / (1.0 + std::exp(-gate)));
        const double y = broken_epilogue ? silu : silu * up;
        out.data[static_cast<std::size_t>(i * n + j)] = quantize_store(y, dt);
      }
    });
    return {out};
  }

  if (plan.kernel_id == "fused_add_rmsnorm") {
    const auto m = cse.key.dims[0], n = cse.key.dims[1];
    const Tensor& x = cse.inputs[0];
    const Tensor& r = cse.inputs[1];
    const Tensor& w = cse.inputs[2];
    const double eps = plan.mutation == PlanMutation::drop_eps
                           ? 0.0
                           : (spec.attrs.count("eps") ? spec.attrs.at("eps") : 0.0);
    Tensor out({m, n}, dt);
    Tensor hid({m, n}, dt);
    std::vector<double> h(static_cast<std::size_t>(n));
    std::vector<float> terms;
    for_each_row(plan, m, [&](std::int64_t i) {
      terms.clear();
      terms.reserve(static_cast<std::size_t>(n));
      for (std::int64_t j = 0; j < n; ++j) {
        const auto idx = static_cast<std::size_t>(i * n + j);
        const double hj =
            static_cast<double>(x.data[idx]) + static_cast<double>(r.data[idx]);
        h[static_cast<std::size_t>(j)] = hj;
        terms.push_back(static_cast<float>(hj * hj));
      }
      const double acc = static_cast<double>(reduce_terms(terms, plan.reduction));
      const double inv = 1.0 / std::sqrt(acc / static_cast<double>(n) + eps);
      for (std::int64_t j = 0; j < n; ++j) {
        const auto idx = static_cast<std::size_t>(i * n + j);
        const double hj = h[static_cast<std::size_t>(j)];
        out.data[idx] =
            quantize_store(hj * inv * static_cast<double>(w.data[static_cast<std::size_t>(j)]), dt);
        hid.data[idx] = quantize_store(hj, dt);
      }
    });
    return {out, hid};
  }

  // merge_attn_states
  const auto n = cse.key.dims[0], h = cse.key.dims[1], d = cse.key.dims[2];
  const Tensor& oa = cse.inputs[0];
  const Tensor& la = cse.inputs[1];
  const Tensor& ob = cse.inputs[2];
  const Tensor& lb = cse.inputs[3];
  const bool skip_renorm = plan.mutation == PlanMutation::skip_renormalization;
  Tensor out({n, h, d}, dt);
  Tensor lout({n, h}, dt);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for_each_row(plan, n * h, [&](std::int64_t i) {
    const double a = la.data[static_cast<std::size_t>(i)];
    const double b = lb.data[static_cast<std::size_t>(i)];
    if (a == kNegInf && b == kNegInf) {
      for (std::int64_t k = 0; k < d; ++k)
        out.data[static_cast<std::size_t>(i * d + k)] = quantize_store(0.0, dt);
      lout.data[static_cast<std::size_t>(i)] = quantize_store(kNegInf, dt);
      return;
    }
    const double big = std::max(a, b);
    const double p = std::exp(a - big);
    const double q = std::exp(b - big);
    const double denom = p + q;
    for (std::int64_t k = 0; k < d; ++k) {
      const auto idx = static_cast<std::size_t>(i * d + k);
      const double weighted = p * oa.data[idx] + q * ob.data[idx];
      out.data[idx] = quantize_store(skip_renorm ? weighted : weighted / denom, dt);
    }
    lout.data[static_cast<std::size_t>(i)] = quantize_store(big + std::log(denom), dt);
  });
  return {out, lout};
}

std::vector<Tensor> run_reference(const ConcreteKernel& kernel, const TestCase& cse) {
  return run_plan(kernel.plan, cse);
}

double Executor::measure_mean_us(const ConcreteKernel& kernel, const TestCase& cse, int warmup,
                                 int reps) {
  for (int i = 0; i < warmup; ++i) (void)time_us(kernel, cse);
  long double acc = 0.0L;  // extended precision keeps the mean of identical samples exact
  for (int i = 0; i < reps; ++i) acc += static_cast<long double>(time_us(kernel, cse));
  return static_cast<double>(acc / static_cast<long double>(reps));
}

SignalBundle SimulatedExecutor::signals(const ConcreteKernel& kernel, const ShapeKey& key) const {
  const auto& a = kernel.assignment;
  const int vec_width = a.at("VEC_WIDTH", 1);
  const int unroll = a.at("UNROLL", 1);
  const int use_shared = a.at("USE_SHARED", 0);
  const int eb = element_bytes(key.dtype);

  const CostCounts cost = count_cost(kernel.plan.kernel_id, key, kernel.plan.epilogue_fused);
  const ResourceUsage usage = estimate_usage(kernel, key, hw_);

  SignalBundle s;
  s.bytes_moved = cost.bytes_moved;
  s.flops = cost.flops;
  s.occupancy = usage.occupancy;
  s.vec_eff = std::min(1.0, static_cast<double>(vec_width) * eb / 16.0);
  const bool staged_reuse = use_shared == 1 && kernel.plan.staging == Staging::shared_tile &&
                            kernel_has_row_reuse(kernel.plan.kernel_id);
  const double stage_eff = staged_reuse ? 1.15 : 1.0;
  const double unroll_eff = std::min(1.0, 0.7 + 0.1 * std::log2(static_cast<double>(unroll)));
  s.mem_time_us = static_cast<double>(cost.bytes_moved) /
                  (hw_.peak_bandwidth_bytes_per_us * s.vec_eff * stage_eff);
  s.compute_time_us = static_cast<double>(cost.flops) / (hw_.peak_flops_per_us * unroll_eff);
  if (s.mem_time_us >= std::max(s.compute_time_us, hw_.launch_overhead_us))
    s.bound_tag = BoundTag::memory_bound;
  else if (s.compute_time_us >= hw_.launch_overhead_us)
    s.bound_tag = BoundTag::compute_bound;
  else
    s.bound_tag = BoundTag::launch_bound;
  return s;
}

double SimulatedExecutor::model_time_us(const ConcreteKernel& kernel, const ShapeKey& key) const {
  const ResourceUsage usage = estimate_usage(kernel, key, hw_);
  const ConstraintReport rep = check_constraints(usage, hw_);
  if (!rep.pass)
    throw InfeasibleAssignment("run_simulated: " + kernel.assignment.id() + " violates " +
                               to_string(rep.violations.front()));
  if (innermost_extent(kernel.plan.kernel_id, key) % kernel.assignment.at("VEC_WIDTH", 1) != 0)
    throw InfeasibleAssignment("run_simulated: " + kernel.assignment.id() + " violates ALIGNMENT");

  const SignalBundle s = signals(kernel, key);
  return hw_.launch_overhead_us + std::max(s.mem_time_us, s.compute_time_us) / s.occupancy;
}

double SimulatedExecutor::time_us(const ConcreteKernel& kernel, const TestCase& cse) {
  return model_time_us(kernel, cse.key);
}

RunResult SimulatedExecutor::run(const ConcreteKernel& kernel, const TestCase& cse) {
  RunResult r;
  r.time_us = model_time_us(kernel, cse.key);
  r.outputs = run_reference(kernel, cse);
  r.signals = signals(kernel, cse.key);
  return r;
}

RunResult run_simulated(const ConcreteKernel& kernel, const TestCase& cse,
                        const HardwareSpec& hw) {
  return SimulatedExecutor(hw).run(kernel, cse);
}

}  // namespace kerntuner
