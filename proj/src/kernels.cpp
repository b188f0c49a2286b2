// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "kerntuner/rng.hpp"

namespace kerntuner {

namespace {

constexpr double kRmsnormDefaultEps = 1e-6;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeMismatch(msg);
}

std::string dims_label(const std::vector<std::int64_t>& dims, char sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << sep;
    os << dims[i];
  }
  return os.str();
}

}  // namespace

std::string ShapeKey::label() const {
  return dims_label(dims, 'x') + ":" + to_string(dtype);
}

std::string ShapeKey::display() const {
  return "(" + dims_label(dims, ',') + ") " + to_string(dtype);
}

std::vector<KernelSpec> list_builtin_kernels() {
  return {
      KernelSpec{"silu_and_mul", 1, 1, 2, {}},
      KernelSpec{"fused_add_rmsnorm", 3, 2, 2, {{"eps", kRmsnormDefaultEps}}},
      KernelSpec{"merge_attn_states", 4, 2, 3, {}},
  };
}

bool is_builtin_kernel(const std::string& kernel_id) {
  for (const auto& s : list_builtin_kernels())
    if (s.kernel_id == kernel_id) return true;
  return false;
}

KernelSpec builtin_kernel(const std::string& kernel_id) {
  for (auto& s : list_builtin_kernels())
    if (s.kernel_id == kernel_id) return s;
  throw UnknownKernel("unknown kernel: " + kernel_id);
}

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, KernelDefinition>& registry() {
  static std::map<std::string, KernelDefinition> r;
  return r;
}

const KernelDefinition* find_registered(const std::string& kernel_id) {
  std::lock_guard<std::mutex> g(registry_mutex());
  const auto it = registry().find(kernel_id);
  return it == registry().end() ? nullptr : &it->second;
}

}  // namespace

void register_kernel(KernelDefinition def) {
  if (!def.shape_rule || !def.reference)
    throw ConfigError("register_kernel: shape_rule and reference are required");
  if (is_builtin_kernel(def.spec.kernel_id))
    throw ConfigError("register_kernel: " + def.spec.kernel_id + " is a built-in");
  std::lock_guard<std::mutex> g(registry_mutex());
  if (!registry().emplace(def.spec.kernel_id, std::move(def)).second)
    throw ConfigError("register_kernel: duplicate kernel id");
}

bool is_registered_kernel(const std::string& kernel_id) {
  return find_registered(kernel_id) != nullptr;
}

KernelSpec find_kernel(const std::string& kernel_id) {
  if (is_builtin_kernel(kernel_id)) return builtin_kernel(kernel_id);
  if (const KernelDefinition* def = find_registered(kernel_id)) return def->spec;
  throw UnknownKernel("unknown kernel: " + kernel_id);
}

IoShapes shape_rule(const KernelSpec& spec, const ShapeKey& key) {
  require(static_cast<int>(key.dims.size()) == spec.key_arity,
          spec.kernel_id + ": key arity " + std::to_string(key.dims.size()) + " != " +
              std::to_string(spec.key_arity));
  for (auto d : key.dims) require(d > 0, spec.kernel_id + ": non-positive dim");

  if (const KernelDefinition* def = find_registered(spec.kernel_id)) return def->shape_rule(key);

  if (spec.kernel_id == "silu_and_mul") {
    const auto m = key.dims[0], n = key.dims[1];
    return {{{m, 2 * n}}, {{m, n}}};
  }
  if (spec.kernel_id == "fused_add_rmsnorm") {
    const auto m = key.dims[0], n = key.dims[1];
    return {{{m, n}, {m, n}, {n}}, {{m, n}, {m, n}}};
  }
  if (spec.kernel_id == "merge_attn_states") {
    const auto n = key.dims[0], h = key.dims[1], d = key.dims[2];
    return {{{n, h, d}, {n, h}, {n, h, d}, {n, h}}, {{n, h, d}, {n, h}}};
  }
  throw UnknownKernel("unknown kernel: " + spec.kernel_id);
}

namespace {

// lse tensors may carry -inf (a masked attention partition); everything else
// must be finite, and NaN / +inf are never valid.
void check_finite(const KernelSpec& spec, const std::vector<Tensor>& inputs) {
  const bool is_merge = spec.kernel_id == "merge_attn_states";
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const bool lse_input = is_merge && (t == 1 || t == 3);
    for (float v : inputs[t].data) {
      if (std::isnan(v)) throw NonFiniteInput(spec.kernel_id + ": NaN input");
      if (std::isinf(v) && !(lse_input && v < 0.0f))
        throw NonFiniteInput(spec.kernel_id + ": non-finite input");
    }
  }
}

void check_input_shapes(const KernelSpec& spec, const ShapeKey& key,
                        const std::vector<Tensor>& inputs) {
  const auto io = shape_rule(spec, key);
  require(inputs.size() == io.inputs.size(), spec.kernel_id + ": input count mismatch");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require(inputs[i].shape == io.inputs[i], spec.kernel_id + ": input shape mismatch");
    require(inputs[i].dtype == key.dtype, spec.kernel_id + ": input dtype mismatch");
  }
}

// Key reconstruction from raw input shapes, for reference_eval callers that
// hand in tensors without a ShapeKey.
ShapeKey key_from_inputs(const KernelSpec& spec, const std::vector<Tensor>& inputs) {
  require(!inputs.empty(), spec.kernel_id + ": no inputs");
  const auto& s0 = inputs[0].shape;
  ShapeKey key;
  key.dtype = inputs[0].dtype;
  if (spec.kernel_id == "silu_and_mul") {
    require(s0.size() == 2 && s0[1] % 2 == 0, "silu_and_mul: input must be (m, 2n)");
    key.dims = {s0[0], s0[1] / 2};
  } else if (spec.kernel_id == "fused_add_rmsnorm") {
    require(s0.size() == 2, "fused_add_rmsnorm: input must be (m, n)");
    key.dims = {s0[0], s0[1]};
  } else if (spec.kernel_id == "merge_attn_states") {
    require(s0.size() == 3, "merge_attn_states: O_a must be (n, h, d)");
    key.dims = {s0[0], s0[1], s0[2]};
  } else {
    throw UnknownKernel("unknown kernel: " + spec.kernel_id);
  }
  return key;
}

}  // namespace

std::vector<Tensor> reference_eval(const KernelSpec& spec, const std::vector<Tensor>& inputs) {
  if (const KernelDefinition* def = find_registered(spec.kernel_id)) {
    check_finite(spec, inputs);
    return def->reference(spec, inputs);
  }

  const ShapeKey key = key_from_inputs(spec, inputs);
  check_input_shapes(spec, key, inputs);
  check_finite(spec, inputs);

  const DType dt = key.dtype;

  if (spec.kernel_id == "silu_and_mul") {
    const auto m = key.dims[0], n = key.dims[1];
    const Tensor& x = inputs[0];
    Tensor out({m, n}, dt);
    for (std::int64_t i = 0; i < m; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        const double gate = x.data[static_cast<std::size_t>(i * 2 * n + j)];
        const double up = x.data[static_cast<std::size_t>(i * 2 * n + n + j)];
        const double silu = gate * (1.0 / (1.0 + std::exp(-gate)));
        out.data[static_cast<std::size_t>(i * n + j)] = quantize_store(silu * up, dt);
      }
    }
    return {out};
  }

  if (spec.kernel_id == "fused_add_rmsnorm") {
    const auto m = key.dims[0], n = key.dims[1];
    const Tensor& x = inputs[0];
    const Tensor& r = inputs[1];
    const Tensor& w = inputs[2];
    const double eps = spec.attrs.count("eps") ? spec.attrs.at("eps") : kRmsnormDefaultEps;
    Tensor out({m, n}, dt);
    Tensor hid({m, n}, dt);
    std::vector<double> h(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::int64_t j = 0; j < n; ++j) {
        const auto idx = static_cast<std::size_t>(i * n + j);
        h[static_cast<std::size_t>(j)] =
            static_cast<double>(x.data[idx]) + static_cast<double>(r.data[idx]);
        acc += h[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
      }
      const double inv = 1.0 / std::sqrt(acc / static_cast<double>(n) + eps);
      for (std::int64_t j = 0; j < n; ++j) {
        const auto idx = static_cast<std::size_t>(i * n + j);
        const double hj = h[static_cast<std::size_t>(j)];
        out.data[idx] = quantize_store(hj * inv * static_cast<double>(w.data[static_cast<std::size_t>(j)]), dt);
        hid.data[idx] = quantize_store(hj, dt);
      }
    }
    return {out, hid};
  }

  if (spec.kernel_id == "merge_attn_states") {
    const auto n = key.dims[0], h = key.dims[1], d = key.dims[2];
    const Tensor& oa = inputs[0];
    const Tensor& la = inputs[1];
    const Tensor& ob = inputs[2];
    const Tensor& lb = inputs[3];
    Tensor out({n, h, d}, dt);
    Tensor lout({n, h}, dt);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < n * h; ++i) {
      const double a = la.data[static_cast<std::size_t>(i)];
      const double b = lb.data[static_cast<std::size_t>(i)];
      double p = 0.0, q = 0.0, big = kNegInf;
      if (a == kNegInf && b == kNegInf) {
        // both partitions masked out: zero output, -inf lse
        for (std::int64_t k = 0; k < d; ++k)
          out.data[static_cast<std::size_t>(i * d + k)] = quantize_store(0.0, dt);
        lout.data[static_cast<std::size_t>(i)] = quantize_store(kNegInf, dt);
        continue;
      }
      big = std::max(a, b);
      p = std::exp(a - big);
      q = std::exp(b - big);
      const double denom = p + q;
      for (std::int64_t k = 0; k < d; ++k) {
        const auto idx = static_cast<std::size_t>(i * d + k);
        const double merged = (p * oa.data[idx] + q * ob.data[idx]) / denom;
        out.data[idx] = quantize_store(merged, dt);
      }
      lout.data[static_cast<std::size_t>(i)] = quantize_store(big + std::log(denom), dt);
    }
    return {out, lout};
  }

  throw UnknownKernel("unknown kernel: " + spec.kernel_id);
}

TestSuite generate_tests(const KernelSpec& spec, const std::vector<ShapeKey>& keys,
                         std::uint64_t seed) {
  if (keys.empty()) throw EmptyKeySet(spec.kernel_id + ": no shape keys");

  TestSuite suite;
  suite.kernel_id = spec.kernel_id;
  suite.seed = seed;
  suite.cases.reserve(keys.size());

  const bool is_merge = spec.kernel_id == "merge_attn_states";
  for (std::size_t ci = 0; ci < keys.size(); ++ci) {
    const ShapeKey& key = keys[ci];
    const auto io = shape_rule(spec, key);
    const CounterRng rng(seed, spec.kernel_id, ci);

    TestCase tc;
    tc.key = key;
    tc.seed = seed;
    tc.case_id = spec.kernel_id + ":" + key.label() + ":" + std::to_string(ci);
    std::uint64_t ctr = 0;
    for (std::size_t t = 0; t < io.inputs.size(); ++t) {
      Tensor ten(io.inputs[t], key.dtype);
      const bool lse_input = is_merge && (t == 1 || t == 3);
      const double lo = lse_input ? -5.0 : -2.0;
      const double hi = lse_input ? 5.0 : 2.0;
      for (auto& v : ten.data) v = quantize_store(rng.uniform(ctr++, lo, hi), key.dtype);
      tc.inputs.push_back(std::move(ten));
    }
    suite.cases.push_back(std::move(tc));
  }
  return suite;
}

std::vector<ShapeKey> builtin_suite_keys(const std::string& kernel_id, DType half_dtype) {
  if (kernel_id == "silu_and_mul") {
    return {
        {{16, 4096}, half_dtype},  {{32, 5120}, half_dtype}, {{32, 8192}, half_dtype},
        {{16, 12288}, half_dtype}, {{64, 8192}, half_dtype},
    };
  }
  if (kernel_id == "fused_add_rmsnorm") {
    return {
        {{128, 4096}, DType::fp32},  {{256, 4096}, DType::fp32},  {{1024, 4096}, DType::fp32},
        {{2048, 8192}, DType::fp32}, {{128, 11008}, DType::fp32}, {{256, 13824}, DType::fp32},
        {{512, 14336}, DType::fp32}, {{1024, 8192}, DType::fp32},
    };
  }
  if (kernel_id == "merge_attn_states") {
    return {
        {{512, 32, 256}, half_dtype}, {{512, 40, 128}, half_dtype}, {{768, 32, 256}, half_dtype},
        {{768, 40, 128}, half_dtype}, {{512, 64, 128}, half_dtype},
    };
  }
  throw UnknownKernel("unknown kernel: " + kernel_id);
}

}  // namespace kerntuner
