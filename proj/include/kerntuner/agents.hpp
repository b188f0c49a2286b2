// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kerntuner/search.hpp"

namespace kerntuner {

enum class Directive {
  increase_vectorization,
  enable_shared_staging,
  switch_reduction_tree,
  switch_reduction_sequential,
  change_grid_mapping,
  no_op,
};

std::string to_string(Directive d);
Directive directive_from_string(const std::string& s);

struct Suggestion {
  Directive directive = Directive::no_op;
  std::string rationale;
};

/// Produces the next plan for a (plan, suggestion) pair. The built-in
/// rule-based provider is total over the catalog; external providers are
/// untrusted and their replies must pass the correctness gate downstream.
class RewriteProvider {
 public:
  virtual ~RewriteProvider() = default;
  virtual ExecutionPlan rewrite(const ExecutionPlan& plan, const Suggestion& suggestion,
                                const SignalBundle& signals, const HardwareSpec& hw) = 0;
  virtual std::string kind() const = 0;
};

/// Applies the catalog transformation directly:
///   enable_shared_staging       staging -> shared_tile (row-reuse kernels)
///   switch_reduction_tree/seq   flips the reduction scheme
///   change_grid_mapping         cycles the kernel's valid mappings
///   increase_vectorization      structural identity (vector width is a
///                               tuning parameter; only the version moves)
///   no_op                       version bump only
/// Every rewrite bumps plan_version. Throws UnknownDirectiveForKernel when
/// the directive does not apply to the kernel.
class RuleBasedProvider final : public RewriteProvider {
 public:
  ExecutionPlan rewrite(const ExecutionPlan& plan, const Suggestion& suggestion,
                        const SignalBundle& signals, const HardwareSpec& hw) override;
  std::string kind() const override { return "rule_based"; }
};

/// Wire-protocol provider: spawns `command` via /bin/sh, writes the request
/// JSON ({plan, directive, signals, constraints}) to stdin and parses the
/// reply JSON ({plan}) from stdout. Replies are schema-checked here and
/// semantically gated by the campaign.
class CommandProvider final : public RewriteProvider {
 public:
  CommandProvider(std::string command, int timeout_ms)
      : command_(std::move(command)), timeout_ms_(timeout_ms) {}

  ExecutionPlan rewrite(const ExecutionPlan& plan, const Suggestion& suggestion,
                        const SignalBundle& signals, const HardwareSpec& hw) override;
  std::string kind() const override { return "external"; }

 private:
  std::string command_;
  int timeout_ms_;
};

/// Deterministic planning rules over the aggregated signals and the current
/// plan structure.
Suggestion suggest(const SignalBundle& aggregate, const ExecutionPlan& plan);

/// Campaign objective: the negative geometric-mean speedup of the general
/// configuration (lower is better).
double score(const std::pair<PerfReport, PerfReport>& perf);

/// Mean time components, worst-case occupancy/vec_eff, summed counts; the
/// bound tag is re-derived from the aggregated components.
SignalBundle aggregate_signals(const std::vector<SignalBundle>& per_case, const HardwareSpec& hw);

struct RoundRecord {
  int round = 0;
  ExecutionPlan plan;          // the plan the round actually ran (after any rollback)
  std::string template_id;
  ParamAssignment general_config;
  SpecializedTable specialized;
  bool pass = false;           // gate verdict of the proposed plan
  PerfReport perf_general;
  PerfReport perf_specialized;
  SignalBundle signals;
  double score = 0.0;
};

struct CampaignResult {
  KernelTemplate best_template;
  ParamAssignment best_general_config;
  SpecializedTable best_specialized;
  double best_score = 0.0;
  int best_round = 0;
  std::vector<RoundRecord> log;
};

struct CampaignSettings {
  int rounds = 1;
  SearchStrategy strategy;
  std::optional<Tolerance> tolerance;
  MeasureProtocol protocol;
};

/// The full two-level loop: round 0 tunes S0 as-is; later rounds apply
/// suggest+rewrite to the previous plan, gate it against the semantic
/// reference (rolling back on failure), re-templatize, derive per-shape
/// feasible spaces, search each shape, select general and specialized
/// configurations, evaluate performance and collect signals. The incumbent
/// updates only on strictly better scores. Deterministic for the rule-based
/// provider.
CampaignResult run_campaign(const ExecutionPlan& s0, const TestSuite& suite,
                            const HardwareSpec& hw, const CampaignSettings& settings,
                            RewriteProvider& provider);

}  // namespace kerntuner
