// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kerntuner/tensor.hpp"

namespace kerntuner {

/// Shape key identifying one point of a kernel's input domain:
/// (m, n) for the 2-d kernels, (n, h, d) for attention-state merging.
struct ShapeKey {
  std::vector<std::int64_t> dims;
  DType dtype = DType::fp32;

  auto operator<=>(const ShapeKey&) const = default;

  /// Compact label, e.g. "128x4096:fp32". Used for map keys and reports.
  std::string label() const;
  /// Display form, e.g. "(128,4096) fp32".
  std::string display() const;
};

struct IoShapes {
  std::vector<std::vector<std::int64_t>> inputs;
  std::vector<std::vector<std::int64_t>> outputs;
};

/// Static description of one kernel: identity, arity, shape rule domain and
/// scalar attributes. The math itself lives in reference_eval.
struct KernelSpec {
  std::string kernel_id;
  int n_inputs = 0;
  int n_outputs = 0;
  int key_arity = 0;  // number of dims in a valid ShapeKey
  std::map<std::string, double> attrs;
};

struct TestCase {
  ShapeKey key;
  std::vector<Tensor> inputs;
  std::string case_id;
  std::uint64_t seed = 0;
};

struct TestSuite {
  std::string kernel_id;
  std::vector<TestCase> cases;
  std::uint64_t seed = 0;

  std::size_t m() const { return cases.size(); }
};

/// The three built-in kernels, in stable order:
/// silu_and_mul, fused_add_rmsnorm, merge_attn_states.
std::vector<KernelSpec> list_builtin_kernels();

KernelSpec builtin_kernel(const std::string& kernel_id);
bool is_builtin_kernel(const std::string& kernel_id);

/// Registration point for additional kernels. Registered kernels join the
/// kernel universe (shape rules, reference semantics, test generation);
/// plan rewriting and tuning stay specific to the built-ins.
struct KernelDefinition {
  KernelSpec spec;
  std::function<IoShapes(const ShapeKey&)> shape_rule;
  std::function<std::vector<Tensor>(const KernelSpec&, const std::vector<Tensor>&)> reference;
};

void register_kernel(KernelDefinition def);  // throws ConfigError on id collision
bool is_registered_kernel(const std::string& kernel_id);
KernelSpec find_kernel(const std::string& kernel_id);  // built-in or registered

/// Full input/output shapes for `key`. Throws ShapeMismatch when the key
/// arity does not match the kernel.
IoShapes shape_rule(const KernelSpec& spec, const ShapeKey& key);

/// Fixed-point semantic reference. All arithmetic in fp64; results rounded
/// to the output dtype only at the store. Deterministic and pure.
///
/// silu_and_mul      X:(m,2n)              -> out:(m,n)
///                   out[i,j] = silu(X[i,j]) * X[i,j+n],  silu(z) = z/(1+e^-z)
/// fused_add_rmsnorm X,R:(m,n), W:(n)      -> out:(m,n), H:(m,n)
///                   H = X + R;  out[i,j] = H[i,j]/sqrt(mean_j(H[i,.]^2)+eps) * W[j]
/// merge_attn_states O_a:(n,h,d), lse_a:(n,h), O_b, lse_b
///                   -> out:(n,h,d), lse_out:(n,h)
///                   M = max(lse_a,lse_b); p = e^(lse_a-M); q = e^(lse_b-M)
///                   out = (p*O_a + q*O_b)/(p+q);  lse_out = M + ln(p+q)
///                   A -inf lse on one side selects the other side exactly.
std::vector<Tensor> reference_eval(const KernelSpec& spec, const std::vector<Tensor>& inputs);

/// One seeded case per key. Values are drawn from a counter-based generator
/// keyed by (seed, kernel_id, case index): uniform in [-2,2], except the lse
/// inputs of merge_attn_states which use [-5,5]. Bit-identical on replay.
TestSuite generate_tests(const KernelSpec& spec, const std::vector<ShapeKey>& keys,
                         std::uint64_t seed);

/// The benchmark shape suite for a built-in kernel:
/// 5 (m,n) shapes for silu_and_mul, 8 fp32 (m,n) shapes for
/// fused_add_rmsnorm, 5 (n,h,d) shapes for merge_attn_states.
/// `half_dtype` selects fp16 or bf16 for the two half-precision suites.
std::vector<ShapeKey> builtin_suite_keys(const std::string& kernel_id,
                                         DType half_dtype = DType::fp16);

}  // namespace kerntuner
