// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "kerntuner/executor.hpp"
#include "kerntuner/verify.hpp"

namespace kerntuner {

/// How to reach an external measurement tool: a shell command that reads one
/// request JSON document on stdin and writes one reply JSON document on
/// stdout. See README for the exchange format.
struct ExternalExecSpec {
  std::string command;
  std::string workdir;     // empty: inherit
  int timeout_ms = 30000;
  std::string device = "external:0";  // invocations serialize per device
  MeasureProtocol protocol;           // embedded into each request
};

/// Backend for real hardware behind the wire protocol. The tool owns the
/// warmup/reps protocol, so measure_mean_us issues a single invocation.
/// Invocations against the same device id are mutually exclusive.
class ExternalExecutor final : public Executor {
 public:
  explicit ExternalExecutor(ExternalExecSpec spec) : spec_(std::move(spec)) {}

  RunResult run(const ConcreteKernel& kernel, const TestCase& cse) override;
  double measure_mean_us(const ConcreteKernel& kernel, const TestCase& cse, int warmup,
                         int reps) override;
  std::string device_id() const override { return spec_.device; }

 private:
  RunResult invoke(const ConcreteKernel& kernel, const TestCase& cse, int warmup, int reps);

  ExternalExecSpec spec_;
};

RunResult run_external(const ExternalExecSpec& spec, const ConcreteKernel& kernel,
                       const TestCase& cse);

/// Run `command` under /bin/sh with `input` on stdin and a deadline.
/// Returns captured stdout. Throws ExecTimeout / ExecNonZeroExit with the
/// captured output attached.
std::string run_command_capture(const std::string& command, const std::string& workdir,
                                const std::string& input, int timeout_ms);

}  // namespace kerntuner
