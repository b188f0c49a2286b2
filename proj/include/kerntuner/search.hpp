// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kerntuner/verify.hpp"

namespace kerntuner {

enum class SearchKind { exhaustive, random_sample, local };

std::string to_string(SearchKind k);
SearchKind search_kind_from_string(const std::string& s);

struct SearchStrategy {
  SearchKind kind = SearchKind::exhaustive;
  int budget = 512;       // evaluations; ignored by exhaustive
  std::uint64_t seed = 0;
  int topk = 5;

  /// exhaustive when the space fits, local hill-climbing otherwise
  static SearchStrategy auto_for(std::size_t space_size, std::uint64_t seed);
};

struct EvaluatedCandidate {
  std::string assignment_id;
  std::optional<double> time_us;  // absent when gating failed
  bool pass = false;
};

struct SearchOutcome {
  ParamAssignment best;
  double best_time_us = 0.0;
  std::vector<EvaluatedCandidate> evaluated;  // in visit order
  std::vector<std::string> topk;              // ascending by (time, id)
};

/// Exact geometric mean: exp(mean(ln v)) in fp64.
double geomean(const std::vector<double>& values);

/// Verdict memo shared across gate calls: plans with equal semantic
/// fingerprints produce identical outputs, so one interpretation per
/// (fingerprint, case) suffices.
class GateCache {
 public:
  /// Returns pass/fail for `kernel` on the single case, computing it at most
  /// once per (semantic fingerprint, case id).
  bool gate(const ConcreteKernel& kernel, const TestCase& cse, const TestSuite& suite_meta,
            std::optional<Tolerance> tol);

 private:
  std::map<std::pair<std::string, std::string>, bool> verdicts_;
};

/// Tuning search over one shape: every visited candidate is instantiated,
/// gated against the semantic reference on this case, and — only when it
/// passes — measured under `proto`. Ties break toward the smaller
/// assignment_id. Throws NoFeasibleCandidatePassed when gating rejects the
/// whole space.
SearchOutcome search(const KernelTemplate& tmpl, const TestCase& cse, const FeasibleSpace& space,
                     const SearchStrategy& strategy, Executor& exec,
                     std::optional<Tolerance> tol, const MeasureProtocol& proto,
                     GateCache* cache = nullptr);

/// Pick the single deployable configuration: pool the per-shape Top-K,
/// keep candidates feasible on every key, measure each over the whole
/// suite, and maximize geometric-mean speedup against the baseline times.
/// Returns the winner and its geomean speedup.
std::pair<ParamAssignment, double> select_general(
    const std::map<ShapeKey, SearchOutcome>& per_shape,
    const std::map<ShapeKey, FeasibleSpace>& spaces, const KernelTemplate& tmpl,
    const TestSuite& suite, const std::map<std::string, double>& baseline_us_by_case,
    Executor& exec, std::optional<Tolerance> tol, const MeasureProtocol& proto,
    GateCache* cache = nullptr);

/// Project per-shape outcomes into the deployable specialized table.
SpecializedTable build_specialized(const std::map<ShapeKey, SearchOutcome>& per_shape);

}  // namespace kerntuner
