#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chartkit/grpo/grpo.hpp"
#include "chartkit/reward/reward.hpp"

namespace chartkit::grpo {

struct SftConfig {
  double learning_rate = 1e-5;
  std::size_t epochs = 1;
  std::size_t batch_size = 48;
  std::uint64_t seed = 0;
  // Optimization steps; 0 derives epochs * ceil(N / batch_size).
  std::size_t max_steps = 0;

  void validate() const;
};

struct CotResult {
  ToyPolicy policy;
  std::vector<double> losses;  // full-data loss before step 1 and after every step
};

// Mini-batch gradient descent on the NLL loss. Mini-batches are drawn from a
// seeded per-epoch permutation; batch_size >= N is full-batch descent.
CotResult train_cot(const ToyPolicy& init, std::span<const SftExample> data, const SftConfig& cfg);

struct TraceRecord {
  std::size_t step = 0;
  double mean_total_reward = 0.0;
  double normalized_reward = 0.0;  // mean_total_reward / (w_acc + w_fmt), in [0, 1]
  double mean_accuracy_reward = 0.0;
  double mean_format_reward = 0.0;
  double mean_response_length = 0.0;
  double objective = 0.0;
  double exact_kl = 0.0;
};

struct TrainingTrace {
  std::vector<TraceRecord> records;

  void write_csv(std::ostream& out) const;
  void write_jsonl(std::ostream& out) const;
  // Chooses the encoding from the extension: ".jsonl" or anything else (CSV).
  void save(const std::string& path) const;
};

struct RftResult {
  ToyPolicy policy;
  TrainingTrace trace;
};

// Optional per-step observer, e.g. for logging.
using StepCallback = std::function<void(const TraceRecord&)>;

// GRPO on the toy policy. Each step snapshots the old policy, samples G
// responses per batch query, scores their texts with the rule-based reward,
// standardizes rewards per group and ascends the analytic gradient. The KL
// anchor is `init` (the post-SFT policy). gold[i] belongs to rl_queries[i].
RftResult train_rft(const ToyPolicy& init, std::span<const std::size_t> rl_queries,
                    std::span<const reward::GoldAnswer> gold, const reward::RewardConfig& reward_cfg,
                    const GrpoConfig& cfg, const StepCallback& on_step = {});

}  // namespace chartkit::grpo
