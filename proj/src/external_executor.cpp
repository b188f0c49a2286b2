// SPDX-License-Identifier: Apache-2.0
#include "kerntuner/external_executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <map>
#include <mutex>

#include "kerntuner/json_io.hpp"

namespace kerntuner {

namespace {

// Measurement runs against one device must not interleave.
std::mutex& device_mutex(const std::string& device) {
  static std::mutex registry_lock;
  static std::map<std::string, std::mutex> registry;
  std::lock_guard<std::mutex> g(registry_lock);
  return registry[device];
}

struct Pipe {
  int fds[2] = {-1, -1};
  Pipe() {
    if (pipe(fds) != 0) throw TunerError("pipe() failed");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fds[0] >= 0) ::close(fds[0]);
    fds[0] = -1;
  }
  void close_write() {
    if (fds[1] >= 0) ::close(fds[1]);
    fds[1] = -1;
  }
};

}  // namespace

std::string run_command_capture(const std::string& command, const std::string& workdir,
                                const std::string& input, int timeout_ms) {
  Pipe to_child, from_child;

  const pid_t pid = fork();
  if (pid < 0) throw TunerError("fork() failed");
  if (pid == 0) {
    dup2(to_child.fds[0], STDIN_FILENO);
    dup2(from_child.fds[1], STDOUT_FILENO);
    to_child.close_read();
    to_child.close_write();
    from_child.close_read();
    from_child.close_write();
    if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(127);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  to_child.close_read();
  from_child.close_write();

  // Write the request, then hand the child EOF. Requests carry shape
  // metadata only (never tensor payloads), so they fit the pipe buffer and
  // the write completes before the child can fill its output pipe.
  std::size_t written = 0;
  while (written < input.size()) {
    const ssize_t n = ::write(to_child.fds[1], input.data() + written, input.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // child may have exited early; its status decides the outcome
    }
    written += static_cast<std::size_t>(n);
  }
  to_child.close_write();

  std::string output;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  char buf[4096];
  bool timed_out = false;
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const int remaining =
        static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
                             .count());
    if (remaining <= 0) {
      timed_out = true;
      break;
    }
    struct pollfd pfd = {from_child.fds[0], POLLIN, 0};
    const int pr = poll(&pfd, 1, remaining);
    if (pr < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (pr == 0) {
      timed_out = true;
      break;
    }
    const ssize_t n = ::read(from_child.fds[0], buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;  // EOF
    output.append(buf, static_cast<std::size_t>(n));
  }

  if (timed_out) {
    kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    throw ExecTimeout("command timed out after " + std::to_string(timeout_ms) +
                      " ms; partial output: " + output.substr(0, 512));
  }

  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw ExecNonZeroExit("command exited with status " + std::to_string(code) +
                          "; output: " + output.substr(0, 512));
  }
  return output;
}

RunResult ExternalExecutor::invoke(const ConcreteKernel& kernel, const TestCase& cse, int warmup,
                                   int reps) {
  std::lock_guard<std::mutex> device_guard(device_mutex(spec_.device));

  json request = {{"kernel_id", kernel.plan.kernel_id},
                  {"plan", to_json(kernel.plan)},
                  {"assignment", kernel.assignment.id()},
                  {"dims", cse.key.dims},
                  {"dtype", to_string(cse.key.dtype)},
                  {"seed", cse.seed},
                  {"warmup", warmup},
                  {"reps", reps}};

  const std::string reply_text =
      run_command_capture(spec_.command, spec_.workdir, request.dump(), spec_.timeout_ms);

  json reply;
  try {
    reply = json::parse(reply_text);
  } catch (const json::exception& e) {
    throw ProtocolParseError(std::string("external reply is not JSON: ") + e.what() +
                             "; output: " + reply_text.substr(0, 512));
  }

  RunResult result;
  try {
    result.time_us = reply.at("time_us").get<double>();
    if (reply.contains("outputs")) {
      for (const auto& tj : reply.at("outputs")) result.outputs.push_back(tensor_from_json(tj));
    } else if (reply.contains("outputs_path")) {
      const json doc = json::parse(read_text_file(reply.at("outputs_path").get<std::string>()));
      for (const auto& tj : doc.at("outputs")) result.outputs.push_back(tensor_from_json(tj));
    } else {
      throw ProtocolParseError("external reply has neither outputs nor outputs_path");
    }
    if (reply.contains("signals")) result.signals = signals_from_json(reply.at("signals"));
  } catch (const json::exception& e) {
    throw ProtocolParseError(std::string("malformed external reply: ") + e.what() +
                             "; output: " + reply_text.substr(0, 512));
  }
  if (!(result.time_us > 0.0))
    throw ProtocolParseError("external reply time_us must be positive");
  return result;
}

RunResult ExternalExecutor::run(const ConcreteKernel& kernel, const TestCase& cse) {
  return invoke(kernel, cse, spec_.protocol.warmup_runs, spec_.protocol.timed_runs);
}

double ExternalExecutor::measure_mean_us(const ConcreteKernel& kernel, const TestCase& cse,
                                         int warmup, int reps) {
  // the external tool owns the protocol; one invocation reports the mean
  return invoke(kernel, cse, warmup, reps).time_us;
}

RunResult run_external(const ExternalExecSpec& spec, const ConcreteKernel& kernel,
                       const TestCase& cse) {
  return ExternalExecutor(spec).run(kernel, cse);
}

ExecutionPlan CommandProvider::rewrite(const ExecutionPlan& plan, const Suggestion& suggestion,
                                       const SignalBundle& signals, const HardwareSpec& hw) {
  json request = {{"plan", to_json(plan)},
                  {"directive", to_string(suggestion.directive)},
                  {"signals", to_json(signals)},
                  {"constraints", {{"hardware", to_json(hw)}}}};

  std::string reply_text;
  try {
    reply_text = run_command_capture(command_, "", request.dump(), timeout_ms_);
  } catch (const ExecTimeout& e) {
    throw ProviderTimeout(e.what());
  } catch (const ExecNonZeroExit& e) {
    throw ProviderMalformedReply(e.what());
  }

  try {
    const json reply = json::parse(reply_text);
    return plan_from_json(reply.at("plan"));
  } catch (const json::exception& e) {
    throw ProviderMalformedReply(std::string("provider reply: ") + e.what() +
                                 "; output: " + reply_text.substr(0, 512));
  } catch (const ConfigError& e) {
    throw ProviderMalformedReply(std::string("provider reply: ") + e.what());
  }
}

}  // namespace kerntuner
