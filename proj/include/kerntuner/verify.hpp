// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kerntuner/executor.hpp"

namespace kerntuner {

/// Mixed absolute/relative tolerance. The metric is
///   d(a, b) = max_i |a_i - b_i| / (atol + rtol*|b_i|)
/// with the reference in the denominator; pass means d <= 1.
struct Tolerance {
  double rtol = 0.0;
  double atol = 0.0;

  static Tolerance dtype_default(DType dt);
};

struct MeasureProtocol {
  int warmup_runs = 20;
  int timed_runs = 100;
  // aggregator is fixed to the arithmetic mean
};

struct CaseResult {
  std::string case_id;
  double max_violation = 0.0;
  bool pass = false;
  std::string note;  // executor error text when a case failed to run
};

struct ValidationReport {
  bool pass = false;
  std::vector<CaseResult> cases;
};

struct PerfRow {
  std::string case_id;
  std::string shape;
  double baseline_us = 0.0;
  double candidate_us = 0.0;
  double speedup = 0.0;  // baseline_us / candidate_us
};

enum class ConfigMode { general, specialized };

std::string to_string(ConfigMode m);

struct PerfReport {
  ConfigMode mode = ConfigMode::general;
  std::vector<PerfRow> rows;
  double geomean_speedup = 1.0;
};

/// Max-violation comparison in fp64. NaN anywhere in `a` fails with +inf.
/// Returns (max_violation, pass).
std::pair<double, bool> compare(const Tensor& a, const Tensor& b, const Tolerance& tol);

/// Gate a plan against the fixed semantic reference (reference_eval) on every
/// case. Tolerances default per case dtype unless overridden.
ValidationReport validate_plan(const ExecutionPlan& plan, const TestSuite& suite,
                               std::optional<Tolerance> tol = std::nullopt);

/// Same gate for a bound kernel. When `exec` is given the candidate outputs
/// come from that backend; otherwise the plan interpreter runs them.
ValidationReport validate_kernel(const ConcreteKernel& kernel, const TestSuite& suite,
                                 std::optional<Tolerance> tol = std::nullopt,
                                 Executor* exec = nullptr);

/// Template gate: probes the all-minimum assignment and the largest
/// resource-feasible assignment; both must pass on every case.
ValidationReport validate_template(const KernelTemplate& tmpl, const TestSuite& suite,
                                   const HardwareSpec& hw,
                                   std::optional<Tolerance> tol = std::nullopt);

/// warmup_runs discarded executions, then the arithmetic mean of timed_runs.
double measure(Executor& exec, const ConcreteKernel& kernel, const TestCase& cse,
               const MeasureProtocol& proto);

struct SpecializedEntry {
  ParamAssignment assignment;
  double time_us = 0.0;
};

/// Deployable per-shape table of best assignments.
struct SpecializedTable {
  std::map<ShapeKey, SpecializedEntry> entries;
};

/// Measure the general configuration and the specialized table against the
/// baseline plan (original plan, default assignment) over the whole suite.
/// Returns the (general, specialized) report pair.
std::pair<PerfReport, PerfReport> evaluate_performance(
    const KernelTemplate& tmpl, const ParamAssignment& general, const SpecializedTable& spec_table,
    const ExecutionPlan& baseline_plan, const TestSuite& suite, Executor& exec,
    const MeasureProtocol& proto);

}  // namespace kerntuner
