#include "chartkit/grpo/training.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "json.hpp"

namespace chartkit::grpo {

namespace {

std::vector<std::size_t> permutation(std::size_t n, Rng rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

// Cycles through seeded per-epoch permutations of [0, n).
class BatchSchedule {
 public:
  BatchSchedule(std::size_t n, std::size_t batch, std::uint64_t seed) : n_(n), batch_(std::min(batch, n)), seed_(seed) {}

  std::vector<std::size_t> next() {
    std::vector<std::size_t> out;
    out.reserve(batch_);
    while (out.size() < batch_) {
      if (pos_ == order_.size()) {
        order_ = permutation(n_, Rng::stream(seed_, epoch_++, 0x5eed));
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::size_t batch_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

std::size_t derived_steps(std::size_t max_steps, std::size_t epochs, std::size_t n, std::size_t batch) {
  if (max_steps > 0) return max_steps;
  const std::size_t per_epoch = (n + batch - 1) / batch;
  return epochs * per_epoch;
}

}  // namespace

void SftConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("sft.learning_rate must be > 0");
  if (batch_size == 0) throw ConfigError("sft.batch_size must be >= 1");
}

CotResult train_cot(const ToyPolicy& init, std::span<const SftExample> data, const SftConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw EmptyBatch("train_cot: no SFT examples");
  CotResult result{init, {}};
  const std::size_t steps = derived_steps(cfg.max_steps, cfg.epochs, data.size(), cfg.batch_size);
  BatchSchedule schedule(data.size(), cfg.batch_size, cfg.seed);
  std::vector<SftExample> batch;
  result.losses.reserve(steps + 1);
  result.losses.push_back(sft_nll_loss(result.policy, data));
  for (std::size_t s = 0; s < steps; ++s) {
    batch.clear();
    for (auto i : schedule.next()) batch.push_back(data[i]);
    const auto g = sft_nll_gradient(result.policy, batch);
    result.policy.apply(g, -cfg.learning_rate);
    result.losses.push_back(sft_nll_loss(result.policy, data));
  }
  return result;
}

void TrainingTrace::write_csv(std::ostream& out) const {
  out << "step,mean_total_reward,normalized_reward,mean_accuracy_reward,mean_format_reward,mean_response_length,objective,exact_kl\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.step << ',' << r.mean_total_reward << ',' << r.normalized_reward << ',' << r.mean_accuracy_reward << ',' << r.mean_format_reward
        << ',' << r.mean_response_length << ',' << r.objective << ',' << r.exact_kl << '\n';
  }
}

void TrainingTrace::write_jsonl(std::ostream& out) const {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["mean_total_reward"] = r.mean_total_reward;
    j["normalized_reward"] = r.normalized_reward;
    j["mean_accuracy_reward"] = r.mean_accuracy_reward;
    j["mean_format_reward"] = r.mean_format_reward;
    j["mean_response_length"] = r.mean_response_length;
    j["objective"] = r.objective;
    j["exact_kl"] = r.exact_kl;
    out << j.dump() << '\n';
  }
}

void TrainingTrace::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write trace: " + path);
  if (path.ends_with(".jsonl")) {
    write_jsonl(out);
  } else {
    write_csv(out);
  }
}

RftResult train_rft(const ToyPolicy& init, std::span<const std::size_t> rl_queries,
                    std::span<const reward::GoldAnswer> gold, const reward::RewardConfig& reward_cfg,
                    const GrpoConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  reward_cfg.validate();
  if (rl_queries.empty()) throw EmptyBatch("train_rft: no RL queries");
  if (gold.size() != rl_queries.size()) throw PreconditionError("train_rft: one gold answer per RL query");

  // Response texts are fixed per query, so every reward is computed once.
  std::vector<std::vector<reward::RewardBreakdown>> rewards(rl_queries.size());
  for (std::size_t i = 0; i < rl_queries.size(); ++i) {
    const auto q = rl_queries[i];
    if (q >= init.num_queries()) throw PreconditionError("train_rft: RL query out of range");
    for (std::size_t r = 0; r < init.vocab_size(q); ++r) {
      rewards[i].push_back(reward::total_reward(init.candidate(q, r).text, gold[i], reward_cfg));
    }
  }

  RftResult result{init, {}};
  const ToyPolicy& ref = init;
  const std::size_t steps = derived_steps(cfg.max_steps, cfg.epochs, rl_queries.size(), cfg.batch_size);
  BatchSchedule schedule(rl_queries.size(), cfg.batch_size, cfg.seed);
  result.trace.records.reserve(steps);

  for (std::size_t step = 1; step <= steps; ++step) {
    const ToyPolicy old = result.policy;
    const auto batch = schedule.next();

    TraceRecord rec;
    rec.step = step;
    std::vector<RolloutGroup> groups;
    groups.reserve(batch.size());
    std::size_t n = 0;
    for (std::size_t slot = 0; slot < batch.size(); ++slot) {
      const auto i = batch[slot];
      Rng rng = Rng::stream(cfg.seed, step, slot);
      auto sample = sample_group(old, rl_queries[i], cfg.group_size, rng);
      RolloutGroup g;
      g.query = rl_queries[i];
      g.responses = std::move(sample.responses);
      g.old_logprobs = std::move(sample.logprobs);
      for (auto r : g.responses) {
        const auto& b = rewards[i][r];
        g.rewards.push_back(b.total);
        rec.mean_total_reward += b.total;
        rec.mean_accuracy_reward += b.accuracy;
        rec.mean_format_reward += b.format;
        rec.mean_response_length += static_cast<double>(old.candidate(g.query, r).tokens);
        ++n;
      }
      g.advantages = compute_advantages(g.rewards);
      groups.push_back(std::move(g));
    }
    const double denom = static_cast<double>(n);
    rec.mean_total_reward /= denom;
    rec.normalized_reward = rec.mean_total_reward / reward_cfg.max_total();
    rec.mean_accuracy_reward /= denom;
    rec.mean_format_reward /= denom;
    rec.mean_response_length /= denom;

    for (std::size_t u = 0; u < cfg.inner_updates; ++u) {
      if (u == 0) rec.objective = grpo_objective(result.policy, ref, groups, cfg);
      const auto grad = grpo_gradient(result.policy, ref, groups, cfg);
      result.policy.apply(grad, cfg.learning_rate);
    }

    double kl = 0.0;
    for (auto q : rl_queries) kl += exact_kl(result.policy, ref, q);
    rec.exact_kl = kl / static_cast<double>(rl_queries.size());

    if (on_step) on_step(rec);
    result.trace.records.push_back(rec);
  }
  return result;
}

}  // namespace chartkit::grpo
