#include <cstdlib>
#include <thread>

#include "chartkit/synth/llm.hpp"
#include "chartkit/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace chartkit::synth {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpLlmSettings HttpLlmSettings::from_env() {
  HttpLlmSettings s;
  s.base_url = env_or_empty("CHARTKIT_LLM_BASE_URL");
  s.api_key = env_or_empty("CHARTKIT_LLM_API_KEY");
  if (auto m = env_or_empty("CHARTKIT_LLM_MODEL"); !m.empty()) s.model = m;
  return s;
}

HttpLlmClient::HttpLlmClient(HttpLlmSettings settings, Sleeper sleeper)
    : settings_(std::move(settings)), sleeper_(std::move(sleeper)) {
  if (settings_.base_url.empty()) throw ConfigError("LLM base URL is not set (CHARTKIT_LLM_BASE_URL)");
  if (settings_.max_attempts < 1) throw ConfigError("llm.max_attempts must be >= 1");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  // Split "scheme://host[:port]/prefix" into the client address and path.
  const auto scheme_end = settings_.base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("LLM base URL needs a scheme: " + settings_.base_url);
  const auto path_start = settings_.base_url.find('/', scheme_end + 3);
  host_ = settings_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : settings_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (host_.starts_with("https://")) throw ConfigError("this build has no TLS support; use an http:// endpoint");
#endif
}

std::string HttpLlmClient::complete(const std::string& prompt) {
  nlohmann::json body;
  body["model"] = settings_.model;
  body["temperature"] = settings_.temperature;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

  std::string last_error;
  auto delay = std::chrono::milliseconds(settings_.backoff_initial_ms);
  for (int attempt = 1; attempt <= settings_.max_attempts; ++attempt) {
    httplib::Client cli(host_);
    const auto secs = settings_.timeout_ms / 1000;
    const auto usecs = (settings_.timeout_ms % 1000) * 1000;
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    auto res = cli.Post(path_prefix_ + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        const auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw LlmError(std::string("malformed chat-completions response: ") + e.what());
      }
    } else if (retryable(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      throw LlmError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    if (attempt < settings_.max_attempts) {
      sleeper_(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(delay.count() * settings_.backoff_factor));
    }
  }
  throw LlmError("LLM request failed after " + std::to_string(settings_.max_attempts) + " attempts: " + last_error);
}

std::string prompt_hash(const std::string& prompt) { return text::hex64(text::fnv1a64(prompt)); }

}  // namespace chartkit::synth
