// SPDX-License-Identifier: Apache-2.0
//
// kerntuner — two-level kernel autotuning: semantic plan rewriting on the
// outside, constrained parameter search on the inside. See README.md for
// formats and examples.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "kerntuner/json_io.hpp"
#include "kerntuner/rng.hpp"

namespace fs = std::filesystem;
using namespace kerntuner;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string format_fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct TuneConfig {
  std::string kernel;
  std::string label;
  std::vector<ShapeKey> shapes;
  std::string hardware_path;  // empty: built-in default
  int rounds = 1;
  std::uint64_t seed = 0;
  SearchStrategy strategy;
  bool strategy_auto = true;
  std::optional<Tolerance> tolerance;
  MeasureProtocol protocol;
  std::string provider_kind = "rule_based";
  std::string provider_command;
  int provider_timeout_ms = 30000;
  std::string out_dir = "out";
  json raw;  // canonical echo for the manifest hash
};

TuneConfig load_tune_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path), nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }

  TuneConfig cfg;
  cfg.raw = j;
  try {
    const int schema = j.value("schema_version", 1);
    if (schema != 1) throw ConfigError("unsupported schema_version");
    cfg.kernel = j.at("kernel").get<std::string>();
    if (!is_builtin_kernel(cfg.kernel)) throw ConfigError("unknown kernel: " + cfg.kernel);
    cfg.label = j.value("label", cfg.kernel);

    if (j.contains("shapes")) {
      for (const auto& sj : j.at("shapes")) cfg.shapes.push_back(shape_key_from_json(sj));
    } else {
      cfg.shapes = builtin_suite_keys(cfg.kernel);
    }
    if (cfg.shapes.empty()) throw ConfigError("shapes must be non-empty");

    if (j.contains("hardware")) {
      cfg.hardware_path = j.at("hardware").get<std::string>();
      const fs::path base = fs::path(path).parent_path();
      const fs::path hw = cfg.hardware_path;
      if (hw.is_relative()) cfg.hardware_path = (base / hw).string();
      if (!fs::exists(cfg.hardware_path))
        throw ConfigError("hardware file does not exist: " + cfg.hardware_path);
    }

    cfg.rounds = j.value("rounds", 1);
    if (cfg.rounds < 1) throw ConfigError("rounds must be >= 1");
    cfg.seed = j.value("seed", std::uint64_t{0});

    if (j.contains("strategy")) {
      const auto& sj = j.at("strategy");
      if (sj.contains("kind")) {
        cfg.strategy.kind = search_kind_from_string(sj.at("kind").get<std::string>());
        cfg.strategy_auto = false;
      }
      cfg.strategy.budget = sj.value("budget", cfg.strategy.budget);
      cfg.strategy.topk = sj.value("topk", cfg.strategy.topk);
    }
    cfg.strategy.seed = cfg.seed;

    if (j.contains("tolerance") && !j.at("tolerance").is_null()) {
      const auto& tj = j.at("tolerance");
      cfg.tolerance = Tolerance{tj.at("rtol").get<double>(), tj.at("atol").get<double>()};
    }
    if (j.contains("protocol")) {
      cfg.protocol.warmup_runs = j.at("protocol").value("warmup", 20);
      cfg.protocol.timed_runs = j.at("protocol").value("reps", 100);
    }
    if (j.contains("provider")) {
      cfg.provider_kind = j.at("provider").value("kind", "rule_based");
      cfg.provider_command = j.at("provider").value("command", "");
      cfg.provider_timeout_ms = j.at("provider").value("timeout_ms", 30000);
    }
    cfg.out_dir = j.value("out_dir", "out");
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return cfg;
}

HardwareSpec hardware_for(const std::string& path) {
  return path.empty() ? default_hardware() : load_hardware(path);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string render_report_txt(const TuneConfig& cfg, const HardwareSpec& hw,
                              const CampaignResult& result) {
  std::ostringstream os;
  const auto& best = result.log[static_cast<std::size_t>(result.best_round)];
  os << "two-level kernel tuning report\n";
  os << "==============================\n";
  os << "kernel: " << cfg.kernel;
  if (cfg.label != cfg.kernel) os << "    label: " << cfg.label;
  os << "\n";
  os << "rounds: " << cfg.rounds << "    strategy: " << to_string(cfg.strategy.kind)
     << "    seed: " << cfg.seed << "    provider: " << cfg.provider_kind << "\n";
  os << "protocol: " << cfg.protocol.warmup_runs << " warmup / " << cfg.protocol.timed_runs
     << " timed runs (arithmetic mean)\n";
  os << "hardware: " << hw.name << "\n\n";

  os << "round  pass  score      geomean speedup (general / specialized)\n";
  for (const auto& rec : result.log) {
    os << "  " << rec.round << "    " << (rec.pass ? "yes " : "no  ") << "  "
       << format_fixed(rec.score) << "    " << format_fixed(rec.perf_general.geomean_speedup)
       << "x / " << format_fixed(rec.perf_specialized.geomean_speedup) << "x\n";
  }
  os << "\nbest round: " << result.best_round << "    template: " << result.best_template.template_id
     << "\n";
  os << "general config: " << result.best_general_config.id() << "\n\n";

  char line[256];
  std::snprintf(line, sizeof(line), "%-22s %13s %13s %16s %13s %14s\n", "shape", "baseline (us)",
                "general (us)", "specialized (us)", "speedup (gen)", "speedup (spec)");
  os << line;
  for (std::size_t i = 0; i < best.perf_general.rows.size(); ++i) {
    const auto& g = best.perf_general.rows[i];
    const auto& s = best.perf_specialized.rows[i];
    std::snprintf(line, sizeof(line), "%-22s %13.4f %13.4f %16.4f %12.4fx %13.4fx\n",
                  g.shape.c_str(), g.baseline_us, g.candidate_us, s.candidate_us, g.speedup,
                  s.speedup);
    os << line;
  }
  os << "\ngeomean speedup: general " << format_fixed(best.perf_general.geomean_speedup)
     << "x    specialized " << format_fixed(best.perf_specialized.geomean_speedup) << "x\n";
  return os.str();
}

std::string render_csv(const CampaignResult& result) {
  const auto& best = result.log[static_cast<std::size_t>(result.best_round)];
  std::ostringstream os;
  os << "shape,dtype,baseline_us,general_us,specialized_us,speedup_general,speedup_specialized\n";
  for (std::size_t i = 0; i < best.perf_general.rows.size(); ++i) {
    const auto& g = best.perf_general.rows[i];
    const auto& s = best.perf_specialized.rows[i];
    // case ids look like kernel:DIMSxDIMS:dtype:index
    std::string dims = g.case_id, dtype;
    const auto c1 = dims.find(':');
    const auto c2 = dims.find(':', c1 + 1);
    const auto c3 = dims.find(':', c2 + 1);
    dtype = dims.substr(c2 + 1, c3 - c2 - 1);
    dims = dims.substr(c1 + 1, c2 - c1 - 1);
    os << dims << ',' << dtype << ',' << json(g.baseline_us).dump() << ','
       << json(g.candidate_us).dump() << ',' << json(s.candidate_us).dump() << ','
       << json(g.speedup).dump() << ',' << json(s.speedup).dump() << "\n";
  }
  return os.str();
}

int cmd_tune(const std::string& config_path, const std::string& out_dir_override,
             std::optional<std::uint64_t> seed_override,
             const std::string& strategy_override, std::optional<int> budget_override,
             std::optional<int> topk_override, const std::string& hardware_override) {
  TuneConfig cfg = load_tune_config(config_path);
  if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.strategy.seed = *seed_override;
  }
  if (!strategy_override.empty()) {
    cfg.strategy.kind = search_kind_from_string(strategy_override);
    cfg.strategy_auto = false;
  }
  if (budget_override) cfg.strategy.budget = *budget_override;
  if (topk_override) cfg.strategy.topk = *topk_override;
  if (!hardware_override.empty()) cfg.hardware_path = hardware_override;

  const HardwareSpec hw = hardware_for(cfg.hardware_path);
  hw.validate();

  const KernelSpec spec = builtin_kernel(cfg.kernel);
  const TestSuite suite = generate_tests(spec, cfg.shapes, cfg.seed);

  if (cfg.strategy_auto) {
    const auto probe = templatize(default_plan(cfg.kernel));
    const auto kind_pick =
        SearchStrategy::auto_for(enumerate_assignments(probe).size(), cfg.seed);
    cfg.strategy.kind = kind_pick.kind;
  }

  std::unique_ptr<RewriteProvider> provider;
  const char* endpoint = std::getenv("KERNTUNER_PROVIDER_ENDPOINT");
  if (endpoint && *endpoint) {
    provider = std::make_unique<CommandProvider>(endpoint, cfg.provider_timeout_ms);
    cfg.provider_kind = "external";
  } else if (cfg.provider_kind == "external") {
    if (cfg.provider_command.empty())
      throw ConfigError("provider.kind=external requires provider.command");
    provider = std::make_unique<CommandProvider>(cfg.provider_command, cfg.provider_timeout_ms);
  } else {
    provider = std::make_unique<RuleBasedProvider>();
  }

  CampaignSettings settings;
  settings.rounds = cfg.rounds;
  settings.strategy = cfg.strategy;
  settings.tolerance = cfg.tolerance;
  settings.protocol = cfg.protocol;

  const CampaignResult result =
      run_campaign(default_plan(cfg.kernel), suite, hw, settings, *provider);

  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);

  // campaign.jsonl: one record per line
  std::string jsonl;
  for (const auto& rec : result.log) jsonl += to_json(rec).dump() + "\n";
  write_text_file((out / "campaign.jsonl").string(), jsonl);

  // result.json: campaign result plus the run parameters it came from
  json result_doc = to_json(result);
  result_doc["schema_version"] = 1;
  result_doc["kernel_id"] = cfg.kernel;
  result_doc["label"] = cfg.label;
  result_doc["seed"] = cfg.seed;
  result_doc["strategy"] = {{"kind", to_string(cfg.strategy.kind)},
                            {"budget", cfg.strategy.budget},
                            {"topk", cfg.strategy.topk}};
  result_doc["protocol"] = {{"warmup", cfg.protocol.warmup_runs},
                            {"reps", cfg.protocol.timed_runs}};
  result_doc["hardware"] = to_json(hw);
  result_doc["suite"] = to_json(suite);
  write_text_file((out / "result.json").string(), result_doc.dump(2) + "\n");

  write_text_file((out / "report.txt").string(), render_report_txt(cfg, hw, result));
  write_text_file((out / "shapes.csv").string(), render_csv(result));

  const json manifest = {{"tool", "kerntuner"},
                         {"version", kToolVersion},
                         {"config_hash", hex64(fnv1a64(cfg.raw.dump()))},
                         {"seed", cfg.seed},
                         {"provider", cfg.provider_kind},
                         {"strategy", to_string(cfg.strategy.kind)},
                         {"protocol",
                          {{"warmup", cfg.protocol.warmup_runs},
                           {"reps", cfg.protocol.timed_runs}}}};
  write_text_file((out / "manifest.json").string(), manifest.dump(2) + "\n");

  // final artifact gate: the incumbent must still verify cleanly
  const auto final_report =
      validate_template(result.best_template, suite, hw, settings.tolerance);
  if (!final_report.pass) {
    std::cerr << "final artifact failed validation\n";
    return 2;
  }

  std::cout << "kernel " << cfg.kernel << ": best score " << format_fixed(result.best_score)
            << " (geomean speedup "
            << format_fixed(result.log[static_cast<std::size_t>(result.best_round)]
                                .perf_general.geomean_speedup)
            << "x) from round " << result.best_round << "\n";
  std::cout << "artifacts written to " << fs::absolute(out).string() << "\n";
  return 0;
}

int cmd_report(const std::string& result_path, const std::string& out_dir) {
  const json doc = json::parse(read_text_file(result_path));
  CampaignResult result;
  for (const auto& rj : doc.at("rounds")) result.log.push_back(round_record_from_json(rj));
  result.best_round = doc.at("best").at("round").get<int>();
  result.best_template = template_from_json(doc.at("best").at("template"));
  result.best_general_config = parse_assignment(doc.at("best").at("general_config").get<std::string>());
  result.best_specialized = specialized_from_json(doc.at("best").at("specialized"));
  result.best_score = doc.at("best").at("score").get<double>();

  TuneConfig cfg;
  cfg.kernel = doc.at("kernel_id").get<std::string>();
  cfg.label = doc.value("label", cfg.kernel);
  cfg.rounds = static_cast<int>(result.log.size());
  cfg.seed = doc.at("seed").get<std::uint64_t>();
  cfg.strategy.kind = search_kind_from_string(doc.at("strategy").at("kind").get<std::string>());
  cfg.protocol.warmup_runs = doc.at("protocol").at("warmup").get<int>();
  cfg.protocol.timed_runs = doc.at("protocol").at("reps").get<int>();
  const HardwareSpec hw = hardware_from_json(doc.at("hardware"));

  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "report.txt").string(),
                  render_report_txt(cfg, hw, result));
  write_text_file((fs::path(out_dir) / "shapes.csv").string(), render_csv(result));
  std::cout << "report regenerated in " << out_dir << "\n";
  return 0;
}

std::vector<ShapeKey> parse_shapes(const std::vector<std::string>& shape_args,
                                   const std::string& kernel, const std::string& dtype_name) {
  if (shape_args.empty()) {
    if (dtype_name.empty()) return builtin_suite_keys(kernel);
    return builtin_suite_keys(kernel, dtype_from_string(dtype_name));
  }
  const DType dt = dtype_from_string(dtype_name.empty() ? "fp32" : dtype_name);
  std::vector<ShapeKey> keys;
  for (const auto& arg : shape_args) {
    ShapeKey key;
    key.dtype = dt;
    std::stringstream ss(arg);
    std::string part;
    while (std::getline(ss, part, 'x')) key.dims.push_back(std::stoll(part));
    keys.push_back(std::move(key));
  }
  return keys;
}

int cmd_verify(const std::string& kernel, const std::vector<std::string>& shape_args,
               const std::string& dtype_name, std::optional<double> rtol,
               std::optional<double> atol, std::uint64_t seed, const std::string& hardware_path,
               bool as_json) {
  const KernelSpec spec = builtin_kernel(kernel);
  const auto keys = parse_shapes(shape_args, kernel, dtype_name);
  const TestSuite suite = generate_tests(spec, keys, seed);
  std::optional<Tolerance> tol;
  if (rtol || atol) tol = Tolerance{rtol.value_or(0.0), atol.value_or(0.0)};

  const HardwareSpec hw = hardware_for(hardware_path);
  const auto report = validate_template(templatize(default_plan(kernel)), suite, hw, tol);

  if (as_json) {
    json cases = json::array();
    for (const auto& c : report.cases) {
      cases.push_back({{"case_id", c.case_id},
                       {"pass", c.pass},
                       {"max_violation", c.max_violation},
                       {"note", c.note}});
    }
    std::cout << json{{"pass", report.pass}, {"cases", cases}}.dump(2) << "\n";
  } else {
    for (const auto& c : report.cases) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.case_id
                << "  max_violation=" << format_fixed(c.max_violation, 6)
                << (c.note.empty() ? "" : "  " + c.note) << "\n";
    }
    std::cout << (report.pass ? "all cases passed\n" : "validation failed\n");
  }
  return report.pass ? 0 : 2;
}

int cmd_bench(const std::string& kernel, const std::string& assignment_text,
              const std::vector<std::string>& shape_args, const std::string& dtype_name,
              std::uint64_t seed, const std::string& hardware_path, int warmup, int reps,
              bool as_json) {
  const KernelSpec spec = builtin_kernel(kernel);
  const auto keys = parse_shapes(shape_args, kernel, dtype_name);
  const TestSuite suite = generate_tests(spec, keys, seed);
  const HardwareSpec hw = hardware_for(hardware_path);
  SimulatedExecutor exec(hw);

  const auto tmpl = templatize(default_plan(kernel));
  const ConcreteKernel bound = instantiate(tmpl, parse_assignment(assignment_text));
  const MeasureProtocol proto{warmup, reps};

  json rows = json::array();
  for (const auto& cse : suite.cases) {
    const double mean = measure(exec, bound, cse, proto);
    if (as_json) {
      rows.push_back({{"shape", cse.key.display()}, {"mean_us", mean}});
    } else {
      std::cout << cse.key.display() << "  mean " << format_fixed(mean) << " us\n";
    }
  }
  if (as_json)
    std::cout << json{{"kernel", kernel}, {"assignment", assignment_text}, {"rows", rows}}.dump(2)
              << "\n";
  return 0;
}

int cmd_search_space(const std::string& kernel, const std::vector<std::string>& shape_args,
                     const std::string& dtype_name, const std::string& hardware_path,
                     bool as_json) {
  const auto keys = parse_shapes(shape_args, kernel, dtype_name);
  const HardwareSpec hw = hardware_for(hardware_path);
  const auto tmpl = templatize(default_plan(kernel));

  for (const auto& key : keys) {
    const auto space = derive_feasible_space(tmpl, key, hw);
    if (as_json) {
      std::cout << to_json(space).dump(2) << "\n";
      continue;
    }
    std::map<std::string, int> histogram;
    for (const auto& [id, tag] : space.pruned) histogram[to_string(tag)]++;
    std::cout << kernel << " " << key.display() << " on " << hw.name << ": "
              << space.assignments.size() << " feasible / " << space.pruned.size()
              << " pruned (of " << space.assignments.size() + space.pruned.size() << ")\n";
    for (const auto& [tag, count] : histogram)
      std::cout << "  " << tag << ": " << count << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-level kernel autotuner (semantic rewriting + constrained search)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // tune
  std::string config_path, out_dir_override, strategy_override, hardware_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> budget_override, topk_override;
  auto* tune = app.add_subcommand("tune", "run a tuning campaign from a config file");
  tune->add_option("--config", config_path, "campaign config (JSON)")->required();
  tune->add_option("--out-dir", out_dir_override, "override the output directory");
  tune->add_option("--seed", seed_override, "override the seed");
  tune->add_option("--strategy", strategy_override, "exhaustive|random|local");
  tune->add_option("--budget", budget_override, "evaluation budget for random/local");
  tune->add_option("--topk", topk_override, "per-shape Top-K pool size");
  tune->add_option("--hardware", hardware_override, "hardware spec file (JSON)");

  // verify
  std::string v_kernel, v_dtype, v_hw;
  std::vector<std::string> v_shapes;
  std::optional<double> v_rtol, v_atol;
  std::uint64_t v_seed = 0;
  bool v_json = false;
  auto* verify = app.add_subcommand("verify", "gate the built-in plan against the reference");
  verify->add_option("--kernel", v_kernel, "kernel id")->required();
  verify->add_option("--shape", v_shapes, "shape like 128x4096 (repeatable)");
  verify->add_option("--dtype", v_dtype, "fp16|bf16|fp32");
  verify->add_option("--rtol", v_rtol, "relative tolerance override");
  verify->add_option("--atol", v_atol, "absolute tolerance override");
  verify->add_option("--seed", v_seed, "test data seed");
  verify->add_option("--hardware", v_hw, "hardware spec file (JSON)");
  verify->add_flag("--json", v_json, "machine-readable output");

  // bench
  std::string b_kernel, b_assignment, b_dtype, b_hw;
  std::vector<std::string> b_shapes;
  std::uint64_t b_seed = 0;
  int b_warmup = 20, b_reps = 100;
  bool b_json = false;
  auto* bench = app.add_subcommand("bench", "measure one assignment over shapes");
  bench->add_option("--kernel", b_kernel, "kernel id")->required();
  bench->add_option("--assignment", b_assignment, "NAME=V,... parameter binding")->required();
  bench->add_option("--shape", b_shapes, "shape like 16x4096 (repeatable)");
  bench->add_option("--dtype", b_dtype, "fp16|bf16|fp32");
  bench->add_option("--seed", b_seed, "test data seed");
  bench->add_option("--hardware", b_hw, "hardware spec file (JSON)");
  bench->add_option("--warmup", b_warmup, "warmup runs");
  bench->add_option("--reps", b_reps, "timed runs");
  bench->add_flag("--json", b_json, "machine-readable output");

  // search-space
  std::string s_kernel, s_dtype, s_hw;
  std::vector<std::string> s_shapes;
  bool s_json = false;
  auto* space = app.add_subcommand("search-space", "show feasible/pruned candidate counts");
  space->add_option("--kernel", s_kernel, "kernel id")->required();
  space->add_option("--shape", s_shapes, "shape like 128x4096 (repeatable)");
  space->add_option("--dtype", s_dtype, "fp16|bf16|fp32");
  space->add_option("--hardware", s_hw, "hardware spec file (JSON)");
  space->add_flag("--json", s_json, "dump the full FeasibleSpace document");

  // report
  std::string r_result, r_out = ".";
  auto* report = app.add_subcommand("report", "regenerate report.txt/shapes.csv from result.json");
  report->add_option("--result", r_result, "path to result.json")->required();
  report->add_option("--out-dir", r_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tune->parsed())
      return cmd_tune(config_path, out_dir_override, seed_override, strategy_override,
                      budget_override, topk_override, hardware_override);
    if (verify->parsed())
      return cmd_verify(v_kernel, v_shapes, v_dtype, v_rtol, v_atol, v_seed, v_hw, v_json);
    if (bench->parsed())
      return cmd_bench(b_kernel, b_assignment, b_shapes, b_dtype, b_seed, b_hw, b_warmup, b_reps,
                       b_json);
    if (space->parsed()) return cmd_search_space(s_kernel, s_shapes, s_dtype, s_hw, s_json);
    if (report->parsed()) return cmd_report(r_result, r_out);
  } catch (const EmptySpace& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TunerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
