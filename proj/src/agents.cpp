// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kerntuner {

std::string to_string(Directive d) {
  switch (d) {
    case Directive::increase_vectorization: return "increase_vectorization";
    case Directive::enable_shared_staging: return "enable_shared_staging";
    case Directive::switch_reduction_tree: return "switch_reduction_tree";
    case Directive::switch_reduction_sequential: return "switch_reduction_sequential";
    case Directive::change_grid_mapping: return "change_grid_mapping";
    case Directive::no_op: return "no_op";
  }
  return "no_op";
}

Directive directive_from_string(const std::string& s) {
  if (s == "increase_vectorization") return Directive::increase_vectorization;
  if (s == "enable_shared_staging") return Directive::enable_shared_staging;
  if (s == "switch_reduction_tree") return Directive::switch_reduction_tree;
  if (s == "switch_reduction_sequential") return Directive::switch_reduction_sequential;
  if (s == "change_grid_mapping") return Directive::change_grid_mapping;
  if (s == "no_op") return Directive::no_op;
  throw ConfigError("unknown directive: " + s);
}

ExecutionPlan RuleBasedProvider::rewrite(const ExecutionPlan& plan, const Suggestion& suggestion,
                                         const SignalBundle& signals, const HardwareSpec& hw) {
  (void)signals;
  (void)hw;
  ExecutionPlan next = plan;
  switch (suggestion.directive) {
    case Directive::enable_shared_staging:
      if (!kernel_has_row_reuse(plan.kernel_id))
        throw UnknownDirectiveForKernel("enable_shared_staging: " + plan.kernel_id +
                                        " has no row reuse");
      next.staging = Staging::shared_tile;
      break;
    case Directive::switch_reduction_tree:
      if (!kernel_has_reduction(plan.kernel_id))
        throw UnknownDirectiveForKernel("switch_reduction_tree: " + plan.kernel_id +
                                        " has no reduction");
      next.reduction = ReductionScheme::tree;
      break;
    case Directive::switch_reduction_sequential:
      if (!kernel_has_reduction(plan.kernel_id))
        throw UnknownDirectiveForKernel("switch_reduction_sequential: " + plan.kernel_id +
                                        " has no reduction");
      next.reduction = ReductionScheme::sequential;
      break;
    case Directive::change_grid_mapping: {
      const auto valid = valid_grid_mappings(plan.kernel_id);
      const auto it = std::find(valid.begin(), valid.end(), plan.grid_mapping);
      const auto pos = it == valid.end() ? 0 : (it - valid.begin() + 1) % valid.size();
      next.grid_mapping = valid[static_cast<std::size_t>(pos)];
      break;
    }
    case Directive::increase_vectorization:
      // vector width is a tuning parameter, and alignment legality lives in
      // the feasibility pruning; there is no structural change to make
      break;
    case Directive::no_op:
      break;
  }
  next.plan_version = plan.plan_version + 1;
  return next;
}

Suggestion suggest(const SignalBundle& aggregate, const ExecutionPlan& plan) {
  switch (aggregate.bound_tag) {
    case BoundTag::memory_bound:
      if (aggregate.vec_eff < 1.0)
        return {Directive::increase_vectorization,
                "memory bound with vector efficiency " + std::to_string(aggregate.vec_eff)};
      if (kernel_has_row_reuse(plan.kernel_id) && plan.staging == Staging::direct)
        return {Directive::enable_shared_staging,
                "memory bound; rows are re-read but staging is direct"};
      return {Directive::no_op, "memory bound at full vector efficiency"};
    case BoundTag::compute_bound:
      if (plan.reduction == ReductionScheme::sequential)
        return {Directive::switch_reduction_tree, "compute bound on a sequential reduction"};
      return {Directive::no_op, "compute bound without a sequential reduction"};
    case BoundTag::launch_bound:
      return {Directive::change_grid_mapping, "launch overhead dominates"};
  }
  return {Directive::no_op, "balanced signals"};
}

double score(const std::pair<PerfReport, PerfReport>& perf) {
  return -perf.first.geomean_speedup;
}

SignalBundle aggregate_signals(const std::vector<SignalBundle>& per_case, const HardwareSpec& hw) {
  SignalBundle agg;
  if (per_case.empty()) return agg;
  agg.occupancy = 1.0;
  agg.vec_eff = 1.0;
  for (const auto& s : per_case) {
    agg.mem_time_us += s.mem_time_us;
    agg.compute_time_us += s.compute_time_us;
    agg.occupancy = std::min(agg.occupancy, s.occupancy);
    agg.vec_eff = std::min(agg.vec_eff, s.vec_eff);
    agg.bytes_moved += s.bytes_moved;
    agg.flops += s.flops;
  }
  agg.mem_time_us /= static_cast<double>(per_case.size());
  agg.compute_time_us /= static_cast<double>(per_case.size());
  if (agg.mem_time_us >= std::max(agg.compute_time_us, hw.launch_overhead_us))
    agg.bound_tag = BoundTag::memory_bound;
  else if (agg.compute_time_us >= hw.launch_overhead_us)
    agg.bound_tag = BoundTag::compute_bound;
  else
    agg.bound_tag = BoundTag::launch_bound;
  return agg;
}

CampaignResult run_campaign(const ExecutionPlan& s0, const TestSuite& suite,
                            const HardwareSpec& hw, const CampaignSettings& settings,
                            RewriteProvider& provider) {
  if (settings.rounds < 1) throw ConfigError("run_campaign: rounds must be >= 1");
  if (suite.cases.empty()) throw EmptySuite("run_campaign: empty test suite");

  SimulatedExecutor exec(hw);
  GateCache gates;

  CampaignResult result;
  result.best_score = std::numeric_limits<double>::infinity();

  ExecutionPlan prev = s0;
  SignalBundle prev_signals;

  for (int r = 0; r < settings.rounds; ++r) {
    // level 1: semantic refactoring
    ExecutionPlan plan = prev;
    if (r > 0) {
      const Suggestion g = suggest(prev_signals, prev);
      try {
        plan = provider.rewrite(prev, g, prev_signals, hw);
      } catch (const ProviderTimeout&) {
        plan = prev;  // treat a dead provider like a failed rewrite
      } catch (const ProviderMalformedReply&) {
        plan = prev;
      }
      if (plan.kernel_id != prev.kernel_id) plan = prev;  // provider swapped kernels
    }

    // correctness gating against the fixed semantic reference; roll back to
    // the previous plan on failure and continue the round on it
    bool pass = true;
    {
      GateCache probe;
      const KernelTemplate probe_tmpl = templatize(plan);
      ParamAssignment lo;
      for (const auto& d : probe_tmpl.params) lo.values[d.name] = d.candidates.front();
      const ConcreteKernel probe_kernel = instantiate(probe_tmpl, lo);
      for (const TestCase& cse : suite.cases)
        pass = pass && gates.gate(probe_kernel, cse, suite, settings.tolerance);
    }
    if (!pass) plan = prev;

    // level 2: parameter search within the resource-feasible region
    const KernelTemplate tmpl = templatize(plan);
    std::map<ShapeKey, FeasibleSpace> spaces;
    std::map<ShapeKey, SearchOutcome> per_shape;
    for (const TestCase& cse : suite.cases) {
      if (!spaces.count(cse.key))
        spaces.emplace(cse.key, derive_feasible_space(tmpl, cse.key, hw));
      per_shape[cse.key] = search(tmpl, cse, spaces.at(cse.key), settings.strategy, exec,
                                  settings.tolerance, settings.protocol, &gates);
    }

    // baseline times for the speedup objective (original plan, default binding)
    const KernelTemplate baseline_tmpl = templatize(s0);
    const ConcreteKernel baseline =
        instantiate(baseline_tmpl, default_baseline_assignment(baseline_tmpl));
    std::map<std::string, double> baseline_us;
    for (const TestCase& cse : suite.cases)
      baseline_us[cse.case_id] = measure(exec, baseline, cse, settings.protocol);

    const auto [general_config, gen_geomean] =
        select_general(per_shape, spaces, tmpl, suite, baseline_us, exec, settings.tolerance,
                       settings.protocol, &gates);
    (void)gen_geomean;
    const SpecializedTable specialized = build_specialized(per_shape);

    const auto perf = evaluate_performance(tmpl, general_config, specialized, s0, suite, exec,
                                           settings.protocol);

    std::vector<SignalBundle> per_case_signals;
    const ConcreteKernel general_kernel = instantiate(tmpl, general_config);
    for (const TestCase& cse : suite.cases)
      per_case_signals.push_back(exec.signals(general_kernel, cse.key));
    const SignalBundle signals = aggregate_signals(per_case_signals, hw);

    RoundRecord record;
    record.round = r;
    record.plan = plan;
    record.template_id = tmpl.template_id;
    record.general_config = general_config;
    record.specialized = specialized;
    record.pass = pass;
    record.perf_general = perf.first;
    record.perf_specialized = perf.second;
    record.signals = signals;
    record.score = score(perf);
    result.log.push_back(record);

    if (record.score < result.best_score) {
      result.best_template = tmpl;
      result.best_general_config = general_config;
      result.best_specialized = specialized;
      result.best_score = record.score;
      result.best_round = r;
    }

    prev = plan;
    prev_signals = signals;
  }
  return result;
}

}  // namespace kerntuner
