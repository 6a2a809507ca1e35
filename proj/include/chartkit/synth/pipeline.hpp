#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chartkit/synth/executor.hpp"
#include "chartkit/synth/llm.hpp"
#include "chartkit/synth/sources.hpp"
#include "chartkit/synth/split.hpp"
#include "chartkit/synth/stats.hpp"
#include "json.hpp"

namespace chartkit::synth {

struct PipelineConfig {
  std::filesystem::path tables_dir;
  std::filesystem::path seeds_dir;
  std::filesystem::path chart_types;
  std::filesystem::path output_dir;

  std::vector<Arity> arities = {Arity::Single, Arity::Multi};
  // Upper bound on the number of items planned per chart type; absent = no cap.
  std::map<std::string, std::size_t> quotas;
  // Seeds paired with each table, drawn at random; 0 pairs every seed.
  std::size_t pairs_per_table = 0;
  std::int64_t timeout_ms = 10000;
  std::size_t workers = 4;
  std::uint64_t seed = 0;
  double sft_fraction = kDefaultSftFraction;

  // Extra entries for the manifest's config snapshot (endpoint, executor).
  nlohmann::ordered_json annotations = nlohmann::ordered_json::object();

  void validate() const;  // throws ConfigError
  nlohmann::ordered_json snapshot() const;
};

struct PipelineCounts {
  std::size_t generated = 0;
  std::size_t execution_failed = 0;
  std::size_t format_rejected = 0;
  std::size_t accepted = 0;

  bool balanced() const { return generated == execution_failed + format_rejected + accepted; }
};

struct DatasetManifest {
  std::string run_id;
  std::uint64_t seed = 0;
  PipelineCounts counts;
  std::map<std::string, std::size_t> rejections;  // reason -> count
  std::size_t sft_size = 0;
  std::size_t rl_size = 0;
  StatsTable stats;
  nlohmann::ordered_json config;

  nlohmann::ordered_json to_json() const;
};

// Outputs, all under output_dir:
//   images/<id>.png      rendered charts of accepted instances
//   instances.jsonl      accepted instances with their split, in plan order
//   transcripts.jsonl    prompts, completions and outcome of every item
//   manifest.json        counts, split sizes, statistics, config snapshot
//
// Configuration problems (including seeds that fail to execute) throw
// ConfigError before anything is written. Per-item failures are counted.
// ExecutorUnavailable propagates.
DatasetManifest run_pipeline(const PipelineConfig& config, LlmClient& client, const ExecutorFactory& executors);

}  // namespace chartkit::synth
