// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/search.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kerntuner/rng.hpp"

namespace kerntuner {

std::string to_string(SearchKind k) {
  switch (k) {
    case SearchKind::exhaustive: return "exhaustive";
    case SearchKind::random_sample: return "random";
    case SearchKind::local: return "local";
  }
  return "exhaustive";
}

SearchKind search_kind_from_string(const std::string& s) {
  if (s == "exhaustive") return SearchKind::exhaustive;
  if (s == "random") return SearchKind::random_sample;
  if (s == "local") return SearchKind::local;
  throw ConfigError("unknown search strategy: " + s);
}

SearchStrategy SearchStrategy::auto_for(std::size_t space_size, std::uint64_t seed) {
  SearchStrategy s;
  s.kind = space_size <= 4096 ? SearchKind::exhaustive : SearchKind::local;
  s.seed = seed;
  return s;
}

double geomean(const std::vector<double>& values) {
  if (values.empty()) throw EmptyList("geomean: empty value list");
  double acc = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw NonPositiveValue("geomean: value " + std::to_string(v) + " <= 0");
    acc += std::log(v);
  }
  return std::exp(acc / static_cast<double>(values.size()));
}

bool GateCache::gate(const ConcreteKernel& kernel, const TestCase& cse,
                     const TestSuite& suite_meta, std::optional<Tolerance> tol) {
  const auto key = std::make_pair(kernel.plan.semantic_fingerprint(), cse.case_id);
  const auto it = verdicts_.find(key);
  if (it != verdicts_.end()) return it->second;

  TestSuite single;
  single.kernel_id = suite_meta.kernel_id;
  single.seed = suite_meta.seed;
  single.cases.push_back(cse);
  const bool pass = validate_kernel(kernel, single, tol).pass;
  verdicts_.emplace(key, pass);
  return pass;
}

namespace {

struct Ranked {
  double time_us;
  std::string id;

  bool operator<(const Ranked& o) const {
    return time_us != o.time_us ? time_us < o.time_us : id < o.id;
  }
};

// deterministic Fisher-Yates, independent of any stdlib shuffle details
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  const CounterRng rng(splitmix64(seed ^ 0x5E4C11u));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bits(i) % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

SearchOutcome search(const KernelTemplate& tmpl, const TestCase& cse, const FeasibleSpace& space,
                     const SearchStrategy& strategy, Executor& exec,
                     std::optional<Tolerance> tol, const MeasureProtocol& proto,
                     GateCache* cache) {
  if (space.assignments.empty()) throw EmptySpace("search: empty feasible space");

  GateCache local_cache;
  GateCache& gates = cache ? *cache : local_cache;
  TestSuite suite_meta;
  suite_meta.kernel_id = tmpl.base_plan.kernel_id;
  suite_meta.seed = cse.seed;

  SearchOutcome outcome;
  std::map<std::string, std::optional<double>> seen;  // assignment_id -> measured time
  std::vector<Ranked> ranked;

  auto evaluate = [&](const ParamAssignment& a) -> std::optional<double> {
    const auto it = seen.find(a.id());
    if (it != seen.end()) return it->second;
    const ConcreteKernel kernel = instantiate(tmpl, a);
    std::optional<double> t;
    if (gates.gate(kernel, cse, suite_meta, tol)) t = measure(exec, kernel, cse, proto);
    outcome.evaluated.push_back({a.id(), t, t.has_value()});
    seen.emplace(a.id(), t);
    if (t) ranked.push_back({*t, a.id()});
    return t;
  };

  if (strategy.kind == SearchKind::exhaustive) {
    for (const auto& a : space.assignments) evaluate(a);
  } else if (strategy.kind == SearchKind::random_sample) {
    if (strategy.budget < 1) throw ConfigError("search: random strategy needs budget >= 1");
    const auto perm = seeded_permutation(space.assignments.size(), strategy.seed);
    const std::size_t n =
        std::min<std::size_t>(static_cast<std::size_t>(strategy.budget), perm.size());
    for (std::size_t i = 0; i < n; ++i) evaluate(space.assignments[perm[i]]);
  } else {
    // local: hill-climb from a seeded feasible start over single-parameter
    // moves to adjacent candidate values
    if (strategy.budget < 1) throw ConfigError("search: local strategy needs budget >= 1");
    std::set<std::string> feasible_ids;
    for (const auto& a : space.assignments) feasible_ids.insert(a.id());

    const CounterRng rng(splitmix64(strategy.seed ^ 0x10CA1u));
    ParamAssignment current =
        space.assignments[static_cast<std::size_t>(rng.bits(1) % space.assignments.size())];
    int evals = 1;
    std::optional<double> current_time = evaluate(current);

    bool improved = true;
    while (improved && evals < strategy.budget) {
      improved = false;
      std::optional<Ranked> best_move;
      for (const auto& d : tmpl.params) {
        const auto& cands = d.candidates;
        const auto pos = std::find(cands.begin(), cands.end(), current.values.at(d.name));
        for (int dir : {-1, +1}) {
          const auto ni = (pos - cands.begin()) + dir;
          if (ni < 0 || ni >= static_cast<std::ptrdiff_t>(cands.size())) continue;
          ParamAssignment neighbor = current;
          neighbor.values[d.name] = cands[static_cast<std::size_t>(ni)];
          if (!feasible_ids.count(neighbor.id())) continue;
          if (!seen.count(neighbor.id())) {
            if (evals >= strategy.budget) continue;
            ++evals;
          }
          const auto t = evaluate(neighbor);
          if (!t) continue;
          const Ranked r{*t, neighbor.id()};
          if (!best_move || r < *best_move) best_move = r;
        }
      }
      if (best_move && current_time && best_move->time_us < *current_time) {
        improved = true;
        current = parse_assignment(best_move->id);
        current_time = best_move->time_us;
      }
    }
  }

  if (ranked.empty())
    throw NoFeasibleCandidatePassed("search: every candidate failed correctness gating for " +
                                    cse.case_id);

  std::sort(ranked.begin(), ranked.end());
  outcome.best = parse_assignment(ranked.front().id);
  outcome.best_time_us = ranked.front().time_us;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(strategy.topk),
                                              ranked.size());
  for (std::size_t i = 0; i < k; ++i) outcome.topk.push_back(ranked[i].id);
  return outcome;
}

std::pair<ParamAssignment, double> select_general(
    const std::map<ShapeKey, SearchOutcome>& per_shape,
    const std::map<ShapeKey, FeasibleSpace>& spaces, const KernelTemplate& tmpl,
    const TestSuite& suite, const std::map<std::string, double>& baseline_us_by_case,
    Executor& exec, std::optional<Tolerance> tol, const MeasureProtocol& proto,
    GateCache* cache) {
  for (const TestCase& cse : suite.cases) {
    if (!per_shape.count(cse.key) || !spaces.count(cse.key))
      throw ConfigError("select_general: missing search outcome for " + cse.key.label());
  }

  // Candidate pool: union of per-shape Top-K, restricted to assignments
  // feasible on every key.
  std::set<std::string> pool;
  for (const auto& [key, outcome] : per_shape)
    pool.insert(outcome.topk.begin(), outcome.topk.end());
  std::vector<std::string> universal;
  for (const auto& id : pool) {
    bool everywhere = true;
    for (const auto& [key, space] : spaces) everywhere = everywhere && space.contains(id);
    if (everywhere) universal.push_back(id);
  }
  if (universal.empty())
    throw EmptyPool("select_general: no Top-K candidate is feasible on every key");

  GateCache local_cache;
  GateCache& gates = cache ? *cache : local_cache;

  std::optional<std::pair<ParamAssignment, double>> best;  // (assignment, geomean)
  for (const auto& id : universal) {
    const ParamAssignment a = parse_assignment(id);
    const ConcreteKernel kernel = instantiate(tmpl, a);
    std::vector<double> speedups;
    bool all_pass = true;
    for (const TestCase& cse : suite.cases) {
      if (!gates.gate(kernel, cse, suite, tol)) {
        all_pass = false;
        break;
      }
      const double t = measure(exec, kernel, cse, proto);
      speedups.push_back(baseline_us_by_case.at(cse.case_id) / t);
    }
    if (!all_pass) continue;
    const double g = geomean(speedups);
    if (!best || g > best->second || (g == best->second && id < best->first.id()))
      best = {a, g};
  }
  if (!best) throw EmptyPool("select_general: every pool candidate failed gating");
  return *best;
}

SpecializedTable build_specialized(const std::map<ShapeKey, SearchOutcome>& per_shape) {
  SpecializedTable table;
  for (const auto& [key, outcome] : per_shape)
    table.entries[key] = {outcome.best, outcome.best_time_us};
  return table;
}

}  // namespace kerntuner
