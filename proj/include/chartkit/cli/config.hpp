#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "chartkit/eval/eval.hpp"
#include "chartkit/grpo/training.hpp"
#include "chartkit/reward/reward.hpp"
#include "chartkit/synth/llm.hpp"
#include "chartkit/synth/pipeline.hpp"
#include "json.hpp"

namespace chartkit::cli {

struct ToolConfig {
  std::uint64_t seed = 0;

  synth::HttpLlmSettings llm;
  bool llm_mock = false;
  std::optional<std::filesystem::path> llm_fixtures;

  std::string executor_command;
  bool executor_mock = false;
  int executor_grace_ms = 1000;

  synth::PipelineConfig pipeline;
  reward::RewardConfig reward;
  grpo::SftConfig sft;
  grpo::GrpoConfig grpo;
  double numeric_threshold = 1.0;
  double text_threshold = 1.0;

  // Copies the top-level seed into every stage config.
  void propagate_seed();
  eval::EvalOptions eval_options() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

// Expands ${NAME} and ${NAME:-fallback}. An unset variable without a
// fallback is a ConfigError; "$$" is a literal '$'.
std::string interpolate_env(std::string_view text, const EnvLookup& env = process_env);

// YAML config. Unknown keys are rejected; relative paths resolve against
// base_dir. Environment defaults (CHARTKIT_LLM_*) fill the llm section first.
ToolConfig parse_config(std::string_view yaml, const std::filesystem::path& base_dir,
                        const EnvLookup& env = process_env);
ToolConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);
// Built-in defaults plus the environment.
ToolConfig default_config(const EnvLookup& env = process_env);

std::string mask_secret(std::string_view secret);

// Full resolved configuration; the API key is always masked.
nlohmann::ordered_json to_json(const ToolConfig& cfg);

}  // namespace chartkit::cli
