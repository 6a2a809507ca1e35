#include "chartkit/synth/executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

#include "chartkit/synth/png.hpp"
#include "chartkit/text.hpp"
#include "json.hpp"

namespace chartkit::synth {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

std::string_view to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::Ok: return "ok";
    case ExecStatus::Error: return "error";
    case ExecStatus::Timeout: return "timeout";
  }
  return "error";
}

ExecStatus parse_exec_status(std::string_view s) {
  if (s == "ok") return ExecStatus::Ok;
  if (s == "error") return ExecStatus::Error;
  if (s == "timeout") return ExecStatus::Timeout;
  throw ProtocolError("unknown executor status: " + std::string(s));
}

std::string encode_request(const ExecRequest& r) {
  json j{{"id", r.id}, {"code", r.code}, {"timeout_ms", r.timeout_ms}, {"output_path", r.output_path}};
  return j.dump();
}

ExecRequest decode_request(const std::string& line) {
  try {
    const auto j = json::parse(line);
    ExecRequest r{j.at("id").get<std::string>(), j.at("code").get<std::string>(),
                  j.at("timeout_ms").get<std::int64_t>(), j.at("output_path").get<std::string>()};
    if (r.timeout_ms <= 0) throw ProtocolError("timeout_ms must be positive");
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed executor request: ") + e.what());
  }
}

std::string encode_response(const ExecResponse& r) {
  json j{{"id", r.id}, {"status", to_string(r.status)}, {"duration_ms", r.duration_ms}};
  if (r.status == ExecStatus::Ok) j["image_path"] = r.image_path;
  if (r.status == ExecStatus::Error) j["error_text"] = r.error_text;
  return j.dump();
}

ExecResponse decode_response(const std::string& line) {
  try {
    const auto j = json::parse(line);
    ExecResponse r;
    r.id = j.at("id").get<std::string>();
    r.status = parse_exec_status(j.at("status").get<std::string>());
    r.duration_ms = j.value("duration_ms", std::int64_t{0});
    if (r.status == ExecStatus::Ok) r.image_path = j.at("image_path").get<std::string>();
    if (r.status == ExecStatus::Error) r.error_text = j.value("error_text", std::string{});
    return r;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed executor response: ") + e.what());
  }
}

MockExecutor::MockExecutor(MockExecutorOptions options) : options_(std::move(options)) {}

ExecResponse MockExecutor::run(const ExecRequest& request) {
  ExecResponse resp;
  resp.id = request.id;
  const auto matches = [&](const std::set<std::string>& ids, const std::vector<std::string>& markers) {
    return ids.contains(request.id) ||
           std::any_of(markers.begin(), markers.end(),
                       [&](const std::string& m) { return request.code.find(m) != std::string::npos; });
  };
  if (matches(options_.timeout_ids, options_.timeout_markers)) {
    resp.status = ExecStatus::Timeout;
    resp.duration_ms = request.timeout_ms;
    return resp;
  }
  if (matches(options_.fail_ids, options_.fail_markers)) {
    resp.status = ExecStatus::Error;
    resp.error_text = "Traceback (most recent call last):\nRuntimeError: scripted failure for " + request.id;
    return resp;
  }
  std::error_code ec;
  std::filesystem::create_directories(std::filesystem::path(request.output_path).parent_path(), ec);
  const auto w = options_.width;
  const auto h = options_.height;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  const auto seed = text::fnv1a64(request.code);
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    rgb[i] = static_cast<std::uint8_t>((seed >> ((i % 8) * 8)) ^ (i / 3));
  }
  try {
    write_png_rgb(request.output_path, w, h, rgb);
  } catch (const Error& e) {
    resp.status = ExecStatus::Error;
    resp.error_text = e.what();
    return resp;
  }
  resp.status = ExecStatus::Ok;
  resp.image_path = request.output_path;
  return resp;
}

SubprocessExecutor::SubprocessExecutor(std::vector<std::string> command, std::string sandbox_root,
                                       std::chrono::milliseconds grace)
    : command_(std::move(command)), sandbox_root_(std::move(sandbox_root)), grace_(grace) {
  if (command_.empty()) throw ConfigError("executor command is empty");
}

SubprocessExecutor::~SubprocessExecutor() { stop(); }

void SubprocessExecutor::start() {
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw ExecutorUnavailable(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ExecutorUnavailable(std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<std::string> args = command_;
  args.push_back(sandbox_root_);
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw ExecutorUnavailable(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void SubprocessExecutor::stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
  buffer_.clear();
}

SubprocessExecutor::ReadResult SubprocessExecutor::read_line(std::string& line, Clock::time_point deadline) {
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return ReadResult::Line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) return ReadResult::Deadline;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(remaining));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) return ReadResult::Deadline;
    char chunk[4096];
    const auto n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return ReadResult::Eof;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ExecResponse SubprocessExecutor::run(const ExecRequest& request) {
  const bool fresh = pid_ < 0;
  if (fresh) start();
  const auto t0 = Clock::now();
  if (!write_all(to_child_, encode_request(request) + "\n")) {
    stop();
    throw ExecutorUnavailable("executor server is not accepting requests: " + command_.front());
  }
  std::string line;
  const auto got = read_line(line, t0 + std::chrono::milliseconds(request.timeout_ms) + grace_);
  if (got == ReadResult::Deadline) {
    stop();
    ExecResponse r;
    r.id = request.id;
    r.status = ExecStatus::Timeout;
    r.duration_ms = elapsed_ms(t0);
    return r;
  }
  if (got == ReadResult::Eof) {
    stop();
    if (fresh) throw ExecutorUnavailable("executor server exited before answering: " + command_.front());
    ExecResponse r;
    r.id = request.id;
    r.status = ExecStatus::Error;
    r.error_text = "executor server terminated unexpectedly";
    r.duration_ms = elapsed_ms(t0);
    return r;
  }
  auto resp = decode_response(line);
  if (resp.id != request.id) {
    stop();
    throw ProtocolError("executor answered id '" + resp.id + "' for request '" + request.id + "'");
  }
  return resp;
}

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  bool have = false;
  for (char c : command) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (c == ' ' || c == '\t') {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur.push_back(c);
      have = true;
    }
  }
  if (have) out.push_back(cur);
  return out;
}

}  // namespace chartkit::synth
