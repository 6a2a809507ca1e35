#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "chartkit/error.hpp"

namespace chartkit::synth {

class LlmError : public Error {
 public:
  using Error::Error;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Single-turn completion. Implementations must be safe to call from
  // several threads at once. Throws LlmError.
  virtual std::string complete(const std::string& prompt) = 0;
};

struct HttpLlmSettings {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string api_key;
  std::string model = "gemini-2.5-flash";
  double temperature = 0.7;
  int timeout_ms = 60000;
  int max_attempts = 3;
  int backoff_initial_ms = 500;
  double backoff_factor = 2.0;

  // Reads base URL and key from CHARTKIT_LLM_BASE_URL / CHARTKIT_LLM_API_KEY.
  static HttpLlmSettings from_env();
};

// OpenAI-compatible chat-completions client. Transport errors, HTTP 429 and
// 5xx are retried with exponential backoff up to max_attempts requests;
// other HTTP errors fail immediately.
class HttpLlmClient : public LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpLlmClient(HttpLlmSettings settings, Sleeper sleeper = {});
  std::string complete(const std::string& prompt) override;

 private:
  HttpLlmSettings settings_;
  Sleeper sleeper_;
  std::string host_;
  std::string path_prefix_;
};

// Stable content address of a prompt (hex FNV-1a 64).
std::string prompt_hash(const std::string& prompt);

// Offline client. Looks up "<prompt_hash>.txt" in the fixture directory and,
// when no fixture matches and fallback is enabled, answers with
// scripted_completion().
class MockLlmClient : public LlmClient {
 public:
  explicit MockLlmClient(std::optional<std::filesystem::path> fixtures = std::nullopt, bool scripted_fallback = true);
  std::string complete(const std::string& prompt) override;

 private:
  std::optional<std::filesystem::path> fixtures_;
  bool fallback_;
};

// Deterministic stand-in for an LLM that understands the toolkit's own
// prompts: code prompts yield plotting code built from the embedded table,
// instance prompts yield a question, reasoning path and answer computed from
// the data literals in the embedded code.
std::string scripted_completion(const std::string& prompt);

}  // namespace chartkit::synth
