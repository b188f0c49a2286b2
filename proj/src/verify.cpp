// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "kerntuner/search.hpp"

namespace kerntuner {

Tolerance Tolerance::dtype_default(DType dt) {
  switch (dt) {
    case DType::fp32: return {1e-5, 1e-6};
    case DType::fp16: return {1e-2, 1e-3};
    case DType::bf16: return {2e-2, 2e-3};
  }
  return {1e-5, 1e-6};
}

std::string to_string(ConfigMode m) {
  return m == ConfigMode::general ? "general" : "specialized";
}

std::pair<double, bool> compare(const Tensor& a, const Tensor& b, const Tolerance& tol) {
  if (!a.same_shape(b)) throw ShapeMismatch("compare: shape or dtype mismatch");

  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double av = a.data[i];
    const double bv = b.data[i];
    if (std::isnan(av)) return {std::numeric_limits<double>::infinity(), false};
    if (av == bv) continue;  // covers -inf == -inf from masked lse rows
    const double diff = std::abs(av - bv);
    const double denom = tol.atol + tol.rtol * std::abs(bv);
    const double violation =
        denom == 0.0 ? std::numeric_limits<double>::infinity() : diff / denom;
    worst = std::max(worst, violation);
  }
  return {worst, worst <= 1.0};
}

namespace {

ValidationReport validate_outputs_fn(
    const TestSuite& suite, std::optional<Tolerance> tol,
    const std::function<std::vector<Tensor>(const TestCase&)>& run_candidate) {
  if (suite.cases.empty()) throw EmptySuite("validate: empty test suite");
  const KernelSpec spec = builtin_kernel(suite.kernel_id);

  ValidationReport report;
  report.pass = true;
  for (const TestCase& cse : suite.cases) {
    CaseResult cr;
    cr.case_id = cse.case_id;
    try {
      const std::vector<Tensor> expected = reference_eval(spec, cse.inputs);
      const std::vector<Tensor> got = run_candidate(cse);
      if (got.size() != expected.size())
        throw ShapeMismatch("validate: candidate output count mismatch");
      const Tolerance t = tol.value_or(Tolerance::dtype_default(cse.key.dtype));
      cr.pass = true;
      for (std::size_t o = 0; o < expected.size(); ++o) {
        const auto [violation, ok] = compare(got[o], expected[o], t);
        cr.max_violation = std::max(cr.max_violation, violation);
        cr.pass = cr.pass && ok;
      }
    } catch (const TunerError& e) {
      cr.pass = false;
      cr.max_violation = std::numeric_limits<double>::infinity();
      cr.note = e.what();
    }
    report.pass = report.pass && cr.pass;
    report.cases.push_back(std::move(cr));
  }
  return report;
}

}  // namespace

ValidationReport validate_plan(const ExecutionPlan& plan, const TestSuite& suite,
                               std::optional<Tolerance> tol) {
  return validate_outputs_fn(suite, tol,
                             [&](const TestCase& cse) { return run_plan(plan, cse); });
}

ValidationReport validate_kernel(const ConcreteKernel& kernel, const TestSuite& suite,
                                 std::optional<Tolerance> tol, Executor* exec) {
  return validate_outputs_fn(suite, tol, [&](const TestCase& cse) {
    return exec ? exec->run(kernel, cse).outputs : run_reference(kernel, cse);
  });
}

ValidationReport validate_template(const KernelTemplate& tmpl, const TestSuite& suite,
                                   const HardwareSpec& hw, std::optional<Tolerance> tol) {
  // Probe the extremes: all-minimum candidates, plus the largest assignment
  // that fits the device (scanning the enumeration from the top).
  ParamAssignment lo;
  for (const auto& d : tmpl.params) lo.values[d.name] = d.candidates.front();

  const auto all = enumerate_assignments(tmpl);
  std::optional<ParamAssignment> hi;
  // suite dtype is uniform per suite; use the first case's for the estimate
  const ShapeKey probe_key = suite.cases.empty() ? ShapeKey{} : suite.cases.front().key;
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    const ConcreteKernel k = instantiate(tmpl, *it);
    if (check_constraints(estimate_usage(k, probe_key, hw), hw).pass) {
      hi = *it;
      break;
    }
  }

  ValidationReport report = validate_kernel(instantiate(tmpl, lo), suite, tol);
  if (hi && hi->id() != lo.id()) {
    const ValidationReport high = validate_kernel(instantiate(tmpl, *hi), suite, tol);
    report.pass = report.pass && high.pass;
    report.cases.insert(report.cases.end(), high.cases.begin(), high.cases.end());
  }
  return report;
}

double measure(Executor& exec, const ConcreteKernel& kernel, const TestCase& cse,
               const MeasureProtocol& proto) {
  if (proto.warmup_runs < 0 || proto.timed_runs < 1)
    throw InvalidProtocol("measure: warmup_runs must be >= 0 and timed_runs >= 1");
  return exec.measure_mean_us(kernel, cse, proto.warmup_runs, proto.timed_runs);
}

std::pair<PerfReport, PerfReport> evaluate_performance(
    const KernelTemplate& tmpl, const ParamAssignment& general, const SpecializedTable& spec_table,
    const ExecutionPlan& baseline_plan, const TestSuite& suite, Executor& exec,
    const MeasureProtocol& proto) {
  if (suite.cases.empty()) throw EmptySuite("evaluate_performance: empty test suite");

  const KernelTemplate baseline_tmpl = templatize(baseline_plan);
  const ConcreteKernel baseline =
      instantiate(baseline_tmpl, default_baseline_assignment(baseline_tmpl));
  const ConcreteKernel general_kernel = instantiate(tmpl, general);

  PerfReport gen;
  gen.mode = ConfigMode::general;
  PerfReport spec;
  spec.mode = ConfigMode::specialized;

  std::vector<double> gen_speedups, spec_speedups;
  for (const TestCase& cse : suite.cases) {
    const auto it = spec_table.entries.find(cse.key);
    if (it == spec_table.entries.end())
      throw MissingSpecializedEntry("evaluate_performance: no specialized entry for " +
                                    cse.key.label());

    const double baseline_us = measure(exec, baseline, cse, proto);
    const double general_us = measure(exec, general_kernel, cse, proto);
    const double special_us = measure(exec, instantiate(tmpl, it->second.assignment), cse, proto);

    gen.rows.push_back(
        {cse.case_id, cse.key.display(), baseline_us, general_us, baseline_us / general_us});
    spec.rows.push_back(
        {cse.case_id, cse.key.display(), baseline_us, special_us, baseline_us / special_us});
    gen_speedups.push_back(gen.rows.back().speedup);
    spec_speedups.push_back(spec.rows.back().speedup);
  }
  gen.geomean_speedup = geomean(gen_speedups);
  spec.geomean_speedup = geomean(spec_speedups);
  return {gen, spec};
}

}  // namespace kerntuner
