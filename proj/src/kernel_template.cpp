// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/kernel_template.hpp"

#include <algorithm>
#include <sstream>

#include "kerntuner/kernels.hpp"
#include "kerntuner/rng.hpp"

namespace kerntuner {

namespace {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace

const ParamDescriptor* KernelTemplate::find(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

std::string ParamAssignment::id() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, value] : values) {
    if (!first) os << ',';
    os << name << '=' << value;
    first = false;
  }
  return os.str();
}

ParamAssignment parse_assignment(const std::string& text) {
  ParamAssignment a;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("malformed assignment entry: '" + item + "'");
    const std::string name = item.substr(0, eq);
    try {
      a.values[name] = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("malformed assignment value in: '" + item + "'");
    }
  }
  if (a.values.empty()) throw ConfigError("empty assignment string");
  return a;
}

KernelTemplate templatize(const ExecutionPlan& plan) {
  if (!is_builtin_kernel(plan.kernel_id))
    throw UnknownKernel("templatize: unknown kernel " + plan.kernel_id);

  KernelTemplate t;
  t.base_plan = plan;
  t.params = {
      {"BLOCK_THREADS", {32, 64, 128, 256, 512, 1024}},
      {"ITEMS_PER_THREAD", {1, 2, 4, 8, 16}},
      {"UNROLL", {1, 2, 4, 8}},
      {"VEC_WIDTH", {1, 2, 4, 8}},
  };
  if (kernel_has_row_reuse(plan.kernel_id)) {
    t.params.push_back({"USE_SHARED", {0, 1}});
  }
  std::sort(t.params.begin(), t.params.end(),
            [](const ParamDescriptor& a, const ParamDescriptor& b) { return a.name < b.name; });

  std::string content = plan.canonical();
  for (const auto& p : t.params) {
    content += ";param:" + p.name + "=";
    for (std::size_t i = 0; i < p.candidates.size(); ++i) {
      if (i) content += '|';
      content += std::to_string(p.candidates[i]);
    }
  }
  t.template_id = hex64(fnv1a64(content));
  return t;
}

ConcreteKernel instantiate(const KernelTemplate& tmpl, const ParamAssignment& a) {
  for (const auto& [name, value] : a.values) {
    const ParamDescriptor* d = tmpl.find(name);
    if (!d) throw UnknownParam("instantiate: unknown parameter " + name);
    if (std::find(d->candidates.begin(), d->candidates.end(), value) == d->candidates.end())
      throw ValueNotInCandidates("instantiate: " + name + "=" + std::to_string(value) +
                                 " not in candidate set");
  }
  for (const auto& d : tmpl.params) {
    if (!a.values.count(d.name))
      throw MissingParam("instantiate: missing parameter " + d.name);
  }

  ConcreteKernel k;
  k.template_id = tmpl.template_id;
  k.assignment = a;
  k.plan = tmpl.base_plan;
  k.plan.resolved_params = a.values;
  return k;
}

std::vector<ParamAssignment> enumerate_assignments(const KernelTemplate& tmpl) {
  std::vector<ParamAssignment> out;
  std::size_t total = 1;
  for (const auto& d : tmpl.params) total *= d.candidates.size();
  out.reserve(total);

  std::vector<std::size_t> idx(tmpl.params.size(), 0);
  while (true) {
    ParamAssignment a;
    for (std::size_t i = 0; i < tmpl.params.size(); ++i)
      a.values[tmpl.params[i].name] = tmpl.params[i].candidates[idx[i]];
    out.push_back(std::move(a));

    // advance odometer, last (lexicographically greatest) name fastest
    std::size_t i = tmpl.params.size();
    while (i > 0) {
      --i;
      if (++idx[i] < tmpl.params[i].candidates.size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
    if (tmpl.params.empty()) return out;
  }
}

ParamAssignment default_baseline_assignment(const KernelTemplate& tmpl) {
  ParamAssignment a;
  for (const auto& d : tmpl.params)
    a.values[d.name] = d.name == "BLOCK_THREADS" ? 256 : d.candidates.front();
  return a;
}

}  // namespace kerntuner
