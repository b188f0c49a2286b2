// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/json_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace kerntuner {

json to_json(const ExecutionPlan& p) {
  json j;
  j["kernel_id"] = p.kernel_id;
  j["grid_mapping"] = to_string(p.grid_mapping);
  j["staging"] = to_string(p.staging);
  if (p.reduction != ReductionScheme::none) j["reduction"] = to_string(p.reduction);
  j["loop_order"] = to_string(p.loop_order);
  j["epilogue_fused"] = p.epilogue_fused;
  j["plan_version"] = p.plan_version;
  if (p.mutation != PlanMutation::none) j["mutation"] = to_string(p.mutation);
  if (!p.resolved_params.empty()) j["params"] = p.resolved_params;
  return j;
}

ExecutionPlan plan_from_json(const json& j) {
  ExecutionPlan p;
  p.kernel_id = j.at("kernel_id").get<std::string>();
  p.grid_mapping = grid_mapping_from_string(j.at("grid_mapping").get<std::string>());
  p.staging = staging_from_string(j.at("staging").get<std::string>());
  p.reduction = j.contains("reduction")
                    ? reduction_from_string(j.at("reduction").get<std::string>())
                    : ReductionScheme::none;
  p.loop_order = loop_order_from_string(j.at("loop_order").get<std::string>());
  p.epilogue_fused = j.at("epilogue_fused").get<bool>();
  p.plan_version = j.at("plan_version").get<int>();
  if (j.contains("mutation")) p.mutation = mutation_from_string(j.at("mutation").get<std::string>());
  if (j.contains("params")) p.resolved_params = j.at("params").get<std::map<std::string, int>>();
  return p;
}

json to_json(const KernelTemplate& t) {
  json params = json::array();
  for (const auto& d : t.params) params.push_back({{"name", d.name}, {"candidates", d.candidates}});
  return {{"template_id", t.template_id}, {"base_plan", to_json(t.base_plan)}, {"params", params}};
}

KernelTemplate template_from_json(const json& j) {
  KernelTemplate t;
  t.template_id = j.at("template_id").get<std::string>();
  t.base_plan = plan_from_json(j.at("base_plan"));
  for (const auto& pj : j.at("params")) {
    t.params.push_back(
        {pj.at("name").get<std::string>(), pj.at("candidates").get<std::vector<int>>()});
  }
  return t;
}

json to_json(const ParamAssignment& a) { return {{"assignment", a.id()}}; }

ParamAssignment assignment_from_json(const json& j) {
  return parse_assignment(j.at("assignment").get<std::string>());
}

json to_json(const ShapeKey& k) {
  return {{"dims", k.dims}, {"dtype", to_string(k.dtype)}};
}

ShapeKey shape_key_from_json(const json& j) {
  ShapeKey k;
  k.dims = j.at("dims").get<std::vector<std::int64_t>>();
  k.dtype = dtype_from_string(j.at("dtype").get<std::string>());
  return k;
}

json to_json(const TestSuite& s) {
  json cases = json::array();
  for (const auto& c : s.cases)
    cases.push_back({{"case_id", c.case_id}, {"dims", c.key.dims}, {"dtype", to_string(c.key.dtype)}});
  return {{"kernel_id", s.kernel_id}, {"seed", s.seed}, {"cases", cases}};
}

TestSuite suite_from_json(const json& j) {
  const std::string kernel_id = j.at("kernel_id").get<std::string>();
  const auto seed = j.at("seed").get<std::uint64_t>();
  std::vector<ShapeKey> keys;
  for (const auto& cj : j.at("cases")) {
    keys.push_back({cj.at("dims").get<std::vector<std::int64_t>>(),
                    dtype_from_string(cj.at("dtype").get<std::string>())});
  }
  return generate_tests(builtin_kernel(kernel_id), keys, seed);
}

json to_json(const HardwareSpec& hw) {
  return {{"name", hw.name},
          {"sm_count", hw.sm_count},
          {"max_threads_per_block", hw.max_threads_per_block},
          {"warp_size", hw.warp_size},
          {"shared_mem_per_block_bytes", hw.shared_mem_per_block_bytes},
          {"registers_per_sm", hw.registers_per_sm},
          {"max_warps_per_sm", hw.max_warps_per_sm},
          {"peak_bandwidth_bytes_per_us", hw.peak_bandwidth_bytes_per_us},
          {"peak_flops_per_us", hw.peak_flops_per_us},
          {"launch_overhead_us", hw.launch_overhead_us},
          {"occupancy_floor", hw.occupancy_floor}};
}

HardwareSpec hardware_from_json(const json& j) {
  HardwareSpec hw;
  hw.name = j.at("name").get<std::string>();
  hw.sm_count = j.at("sm_count").get<int>();
  hw.max_threads_per_block = j.at("max_threads_per_block").get<int>();
  hw.warp_size = j.at("warp_size").get<int>();
  hw.shared_mem_per_block_bytes = j.at("shared_mem_per_block_bytes").get<int>();
  hw.registers_per_sm = j.at("registers_per_sm").get<int>();
  hw.max_warps_per_sm = j.at("max_warps_per_sm").get<int>();
  hw.peak_bandwidth_bytes_per_us = j.at("peak_bandwidth_bytes_per_us").get<double>();
  hw.peak_flops_per_us = j.at("peak_flops_per_us").get<double>();
  hw.launch_overhead_us = j.at("launch_overhead_us").get<double>();
  if (j.contains("occupancy_floor")) hw.occupancy_floor = j.at("occupancy_floor").get<double>();
  hw.validate();
  return hw;
}

HardwareSpec load_hardware(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("hardware file " + path + ": " + e.what());
  }
  return hardware_from_json(j);
}

json to_json(const FeasibleSpace& s) {
  json assignments = json::array();
  for (const auto& a : s.assignments) assignments.push_back(a.id());
  json pruned = json::array();
  for (const auto& [id, tag] : s.pruned) pruned.push_back({{"assignment", id}, {"reason", to_string(tag)}});
  return {{"template_id", s.template_id},
          {"hardware", s.hardware_name},
          {"key", to_json(s.key)},
          {"assignments", assignments},
          {"pruned", pruned}};
}

json to_json(const Tensor& t) {
  static_assert(sizeof(float) == 4);
  return {{"dims", t.shape},
          {"dtype", to_string(t.dtype)},
          {"data_b64", base64_encode(reinterpret_cast<const unsigned char*>(t.data.data()),
                                     t.data.size() * sizeof(float))}};
}

Tensor tensor_from_json(const json& j) {
  Tensor t;
  t.shape = j.at("dims").get<std::vector<std::int64_t>>();
  t.dtype = dtype_from_string(j.at("dtype").get<std::string>());
  const auto bytes = base64_decode(j.at("data_b64").get<std::string>());
  if (bytes.size() % sizeof(float) != 0 ||
      static_cast<std::int64_t>(bytes.size() / sizeof(float)) != Tensor::numel_of(t.shape))
    throw ProtocolParseError("tensor payload size does not match dims");
  t.data.resize(bytes.size() / sizeof(float));
  std::memcpy(t.data.data(), bytes.data(), bytes.size());
  return t;
}

json to_json(const SignalBundle& s) {
  return {{"mem_time_us", s.mem_time_us},
          {"compute_time_us", s.compute_time_us},
          {"occupancy", s.occupancy},
          {"vec_eff", s.vec_eff},
          {"bound_tag", to_string(s.bound_tag)},
          {"bytes_moved", s.bytes_moved},
          {"flops", s.flops}};
}

SignalBundle signals_from_json(const json& j) {
  SignalBundle s;
  s.mem_time_us = j.at("mem_time_us").get<double>();
  s.compute_time_us = j.at("compute_time_us").get<double>();
  s.occupancy = j.at("occupancy").get<double>();
  if (j.contains("vec_eff")) s.vec_eff = j.at("vec_eff").get<double>();
  s.bound_tag = bound_tag_from_string(j.at("bound_tag").get<std::string>());
  s.bytes_moved = j.at("bytes_moved").get<std::int64_t>();
  s.flops = j.at("flops").get<std::int64_t>();
  return s;
}

json to_json(const PerfReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"case_id", row.case_id},
                    {"shape", row.shape},
                    {"baseline_us", row.baseline_us},
                    {"candidate_us", row.candidate_us},
                    {"speedup", row.speedup}});
  }
  return {{"mode", to_string(r.mode)}, {"rows", rows}, {"geomean_speedup", r.geomean_speedup}};
}

PerfReport perf_report_from_json(const json& j) {
  PerfReport r;
  r.mode = j.at("mode").get<std::string>() == "specialized" ? ConfigMode::specialized
                                                            : ConfigMode::general;
  for (const auto& rj : j.at("rows")) {
    r.rows.push_back({rj.at("case_id").get<std::string>(), rj.at("shape").get<std::string>(),
                      rj.at("baseline_us").get<double>(), rj.at("candidate_us").get<double>(),
                      rj.at("speedup").get<double>()});
  }
  r.geomean_speedup = j.at("geomean_speedup").get<double>();
  return r;
}

json to_json(const SearchOutcome& o) {
  json evaluated = json::array();
  for (const auto& e : o.evaluated) {
    evaluated.push_back({{"assignment", e.assignment_id},
                         {"time_us", e.time_us ? json(*e.time_us) : json(nullptr)},
                         {"pass", e.pass}});
  }
  return {{"best", o.best.id()},
          {"best_time_us", o.best_time_us},
          {"evaluated", evaluated},
          {"topk", o.topk}};
}

json to_json(const SpecializedTable& t) {
  json entries = json::object();
  for (const auto& [key, entry] : t.entries) {
    entries[key.label()] = {{"dims", key.dims},
                            {"dtype", to_string(key.dtype)},
                            {"assignment", entry.assignment.id()},
                            {"time_us", entry.time_us}};
  }
  return entries;
}

SpecializedTable specialized_from_json(const json& j) {
  SpecializedTable t;
  for (const auto& [label, ej] : j.items()) {
    (void)label;
    ShapeKey key{ej.at("dims").get<std::vector<std::int64_t>>(),
                 dtype_from_string(ej.at("dtype").get<std::string>())};
    t.entries[key] = {parse_assignment(ej.at("assignment").get<std::string>()),
                      ej.at("time_us").get<double>()};
  }
  return t;
}

json to_json(const RoundRecord& r) {
  return {{"round", r.round},
          {"plan", to_json(r.plan)},
          {"template_id", r.template_id},
          {"general_config", r.general_config.id()},
          {"specialized", to_json(r.specialized)},
          {"pass", r.pass},
          {"perf", {{"general", to_json(r.perf_general)}, {"specialized", to_json(r.perf_specialized)}}},
          {"signals", to_json(r.signals)},
          {"score", r.score}};
}

RoundRecord round_record_from_json(const json& j) {
  RoundRecord r;
  r.round = j.at("round").get<int>();
  r.plan = plan_from_json(j.at("plan"));
  r.template_id = j.at("template_id").get<std::string>();
  r.general_config = parse_assignment(j.at("general_config").get<std::string>());
  r.specialized = specialized_from_json(j.at("specialized"));
  r.pass = j.at("pass").get<bool>();
  r.perf_general = perf_report_from_json(j.at("perf").at("general"));
  r.perf_specialized = perf_report_from_json(j.at("perf").at("specialized"));
  r.signals = signals_from_json(j.at("signals"));
  r.score = j.at("score").get<double>();
  return r;
}

json to_json(const CampaignResult& r) {
  json rounds = json::array();
  for (const auto& rec : r.log) rounds.push_back(to_json(rec));
  return {{"best",
           {{"round", r.best_round},
            {"template", to_json(r.best_template)},
            {"general_config", r.best_general_config.id()},
            {"specialized", to_json(r.best_specialized)},
            {"score", r.best_score}}},
          {"rounds", rounds}};
}

namespace {
constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(data[i]) << 16;
    if (i + 1 < len) chunk |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    if (i + 2 < len) chunk |= static_cast<std::uint32_t>(data[i + 2]);
    out.push_back(kB64Chars[(chunk >> 18) & 0x3F]);
    out.push_back(kB64Chars[(chunk >> 12) & 0x3F]);
    out.push_back(i + 1 < len ? kB64Chars[(chunk >> 6) & 0x3F] : '=');
    out.push_back(i + 2 < len ? kB64Chars[chunk & 0x3F] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> out;
  int acc = 0, bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = value_of(c);
    if (v < 0) throw ProtocolParseError("invalid base64 character");
    acc = (acc << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

}  // namespace kerntuner
