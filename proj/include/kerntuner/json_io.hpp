// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "kerntuner/agents.hpp"
#include "kerntuner/external_executor.hpp"

namespace kerntuner {

using nlohmann::json;

// plans / templates
json to_json(const ExecutionPlan& p);
ExecutionPlan plan_from_json(const json& j);
json to_json(const KernelTemplate& t);
KernelTemplate template_from_json(const json& j);
json to_json(const ParamAssignment& a);
ParamAssignment assignment_from_json(const json& j);

// shapes / suites
json to_json(const ShapeKey& k);
ShapeKey shape_key_from_json(const json& j);
json to_json(const TestSuite& s);  // data never stored; cases carry dims+dtype only
TestSuite suite_from_json(const json& j);  // regenerates inputs from the seed

// hardware / feasibility
json to_json(const HardwareSpec& hw);
HardwareSpec hardware_from_json(const json& j);
HardwareSpec load_hardware(const std::string& path);
json to_json(const FeasibleSpace& s);

// tensors (external exchange format)
json to_json(const Tensor& t);
Tensor tensor_from_json(const json& j);

// signals / measurement / reports
json to_json(const SignalBundle& s);
SignalBundle signals_from_json(const json& j);
json to_json(const PerfReport& r);
PerfReport perf_report_from_json(const json& j);
json to_json(const SearchOutcome& o);
json to_json(const SpecializedTable& t);
SpecializedTable specialized_from_json(const json& j);

// campaign artifacts
json to_json(const RoundRecord& r);
RoundRecord round_record_from_json(const json& j);
json to_json(const CampaignResult& r);

// helpers
std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace kerntuner
