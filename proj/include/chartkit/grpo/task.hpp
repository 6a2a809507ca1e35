#pragma once

// Bandit tasks for the two-stage toy training.
//
// Every reasoning item becomes one query whose candidate responses are
// rewrites of the item's own think/answer pair: the full step-by-step
// response, the same reasoning with a wrong answer, shallow responses with a
// right or wrong answer, and several malformed variants. Candidates carry
// three style features (think tags, answer tags, step-by-step reasoning) that
// couple the queries through the policy's shared weights.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chartkit/grpo/grpo.hpp"
#include "chartkit/reward/reward.hpp"

namespace chartkit::grpo {

struct TaskItem {
  std::string id;
  std::string question;
  std::string think;
  std::string answer;
  std::string split;  // "sft" or "rl"
};

struct BanditTask {
  std::vector<TaskItem> items;
  std::shared_ptr<const Vocabulary> vocab;
  std::vector<reward::GoldAnswer> gold;  // one per query
  std::vector<SftExample> sft;           // targets are the full reasoning candidate
  std::vector<std::size_t> rl_queries;

  std::vector<reward::GoldAnswer> rl_gold() const;
};

inline constexpr std::size_t kReasoningCandidate = 0;

BanditTask build_bandit_task(std::vector<TaskItem> items);

// The bundled fixture: deterministic synthetic chart questions with numeric
// and text answers, every seventh item held out for RL.
std::vector<TaskItem> bandit_fixture_items(std::size_t count = 70, std::uint64_t seed = 2024);

// Checkpoints pair the task items with policy parameters so a later stage
// can rebuild the identical vocabulary.
struct Checkpoint {
  std::string stage;  // "init", "cot" or "rft"
  std::vector<TaskItem> items;
  std::vector<double> parameters;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace chartkit::grpo
