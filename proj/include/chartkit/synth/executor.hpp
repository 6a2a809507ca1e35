#pragma once

// Client side of the plotting-script executor.
//
// Wire protocol (one JSON object per line in each direction, strictly one
// response per request, in request order):
//
//   request:  {"id": str, "code": str, "timeout_ms": int, "output_path": str}
//   response: {"id": str, "status": "ok"|"error"|"timeout",
//              "image_path": str   (iff ok),
//              "error_text": str   (iff error),
//              "duration_ms": int}
//
// The server is started with the sandbox root as its only argument.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "chartkit/error.hpp"

namespace chartkit::synth {

class ExecutorUnavailable : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

enum class ExecStatus { Ok, Error, Timeout };

std::string_view to_string(ExecStatus s);
ExecStatus parse_exec_status(std::string_view s);

struct ExecRequest {
  std::string id;
  std::string code;
  std::int64_t timeout_ms = 10000;
  std::string output_path;
};

struct ExecResponse {
  std::string id;
  ExecStatus status = ExecStatus::Error;
  std::string image_path;
  std::string error_text;
  std::int64_t duration_ms = 0;
};

std::string encode_request(const ExecRequest& r);
ExecRequest decode_request(const std::string& line);  // throws ProtocolError
std::string encode_response(const ExecResponse& r);
ExecResponse decode_response(const std::string& line);  // throws ProtocolError

class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecResponse run(const ExecRequest& request) = 0;
};

using ExecutorFactory = std::function<std::unique_ptr<Executor>()>;

struct MockExecutorOptions {
  // Requests whose id is listed, or whose code contains a marker, fail.
  std::set<std::string> fail_ids;
  std::vector<std::string> fail_markers = {"raise "};
  // Likewise for simulated timeouts (reported immediately, no waiting).
  std::set<std::string> timeout_ids;
  std::vector<std::string> timeout_markers = {"while True"};
  std::uint32_t width = 64;
  std::uint32_t height = 48;
};

// In-process executor: never runs the code. Succeeding requests get a small
// deterministic PNG derived from the code text.
class MockExecutor : public Executor {
 public:
  explicit MockExecutor(MockExecutorOptions options = {});
  ExecResponse run(const ExecRequest& request) override;

 private:
  MockExecutorOptions options_;
};

// Talks to an executor server over pipes. If a response does not arrive
// within timeout_ms + grace the server is killed, the request is reported as
// a timeout and the next request starts a fresh server.
class SubprocessExecutor : public Executor {
 public:
  SubprocessExecutor(std::vector<std::string> command, std::string sandbox_root,
                     std::chrono::milliseconds grace = std::chrono::milliseconds(1000));
  ~SubprocessExecutor() override;
  SubprocessExecutor(const SubprocessExecutor&) = delete;
  SubprocessExecutor& operator=(const SubprocessExecutor&) = delete;

  ExecResponse run(const ExecRequest& request) override;
  int server_pid() const { return pid_; }

 private:
  enum class ReadResult { Line, Eof, Deadline };

  void start();
  void stop();
  ReadResult read_line(std::string& line, std::chrono::steady_clock::time_point deadline);

  std::vector<std::string> command_;
  std::string sandbox_root_;
  std::chrono::milliseconds grace_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// Splits a command line on whitespace; single and double quotes group.
std::vector<std::string> split_command(const std::string& command);

}  // namespace chartkit::synth
