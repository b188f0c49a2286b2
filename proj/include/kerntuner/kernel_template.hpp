// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "kerntuner/plan.hpp"

namespace kerntuner {

/// One tunable execution-strategy axis with its discrete candidate values.
struct ParamDescriptor {
  std::string name;            // BLOCK_THREADS, ITEMS_PER_THREAD, VEC_WIDTH, UNROLL, USE_SHARED
  std::vector<int> candidates; // non-empty, strictly increasing
};

/// An ExecutionPlan plus named tunable parameters: the searchable kernel
/// family. template_id is a content hash of (base_plan, params) so logs can
/// refer to templates immutably.
struct KernelTemplate {
  ExecutionPlan base_plan;
  std::vector<ParamDescriptor> params;  // sorted by name
  std::string template_id;

  const ParamDescriptor* find(const std::string& name) const;
};

/// A point of the candidate space: one value per declared descriptor.
struct ParamAssignment {
  std::map<std::string, int> values;

  /// Canonical "NAME=V,..." string, sorted by name.
  std::string id() const;

  int at(const std::string& name, int fallback) const {
    auto it = values.find(name);
    return it == values.end() ? fallback : it->second;
  }
};

/// Parse the canonical "NAME=V,..." form back into an assignment.
ParamAssignment parse_assignment(const std::string& text);

/// A template bound to one assignment; the runnable unit.
struct ConcreteKernel {
  std::string template_id;
  ParamAssignment assignment;
  ExecutionPlan plan;  // base plan with resolved_params embedded
};

/// Derive the tunable axes for a plan. Always BLOCK_THREADS,
/// ITEMS_PER_THREAD, UNROLL and VEC_WIDTH; USE_SHARED additionally for
/// kernels whose rows are re-read (shared staging can pay off there).
/// Deterministic: equal plans yield equal template_ids.
KernelTemplate templatize(const ExecutionPlan& plan);

/// Bind `a` to the template. Never clamps: a value outside its candidate
/// list or a missing/unknown name is an error.
ConcreteKernel instantiate(const KernelTemplate& tmpl, const ParamAssignment& a);

/// Full Cartesian product of the candidate lists, in lexicographic order of
/// the sorted parameter names.
std::vector<ParamAssignment> enumerate_assignments(const KernelTemplate& tmpl);

/// Baseline binding used for the reference measurement: BLOCK_THREADS=256,
/// everything else at its minimum candidate.
ParamAssignment default_baseline_assignment(const KernelTemplate& tmpl);

}  // namespace kerntuner
