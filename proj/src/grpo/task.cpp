#include "chartkit/grpo/task.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chartkit/text.hpp"
#include "json.hpp"

namespace chartkit::grpo {

namespace {

using nlohmann::json;

constexpr std::string_view kShallowThink = "I will read the answer directly from the chart.";

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Two distinct wrong answers, each well outside any sane tolerance.
std::array<std::string, 2> wrong_answers(const reward::GoldAnswer& gold) {
  if (gold.is_numeric()) {
    const double g = gold.value;
    if (g == 0.0) return {"1", "-1"};
    return {format_number(g * 1.5 + 1.0), format_number(g * 0.5 - 1.0)};
  }
  std::string reversed(gold.raw.rbegin(), gold.raw.rend());
  if (reward::canonicalize_text(reversed, true) == reward::canonicalize_text(gold.raw, true)) reversed += " x";
  return {"not " + gold.raw, reversed};
}

Candidate make(std::string text, std::array<double, 3> features) {
  Candidate c;
  c.tokens = text::count_whitespace_tokens(text);
  c.text = std::move(text);
  c.features.assign(features.begin(), features.end());
  return c;
}

std::vector<Candidate> candidates_for(const TaskItem& item, const reward::GoldAnswer& gold) {
  const auto wrong = wrong_answers(gold);
  std::vector<Candidate> c;
  c.push_back(make(reward::serialize_response(item.think, item.answer), {1, 1, 1}));
  c.push_back(make(reward::serialize_response(item.think, wrong[0]), {1, 1, 1}));
  c.push_back(make(reward::serialize_response(kShallowThink, item.answer), {1, 1, 0}));
  c.push_back(make(reward::serialize_response(kShallowThink, wrong[1]), {1, 1, 0}));
  c.push_back(make("<answer>" + item.answer + "</answer>", {0, 1, 0}));
  c.push_back(make(item.answer, {0, 0, 0}));
  c.push_back(make("The answer is " + wrong[0] + ".", {0, 0, 0}));
  c.push_back(make("<think>" + item.think + "</think>\nSo the answer is " + item.answer + ".", {1, 0, 1}));
  return c;
}

json item_to_json(const TaskItem& it) {
  return json{{"id", it.id}, {"question", it.question}, {"think", it.think}, {"answer", it.answer}, {"split", it.split}};
}

TaskItem item_from_json(const json& j) {
  return TaskItem{j.at("id").get<std::string>(), j.at("question").get<std::string>(),
                  j.at("think").get<std::string>(), j.at("answer").get<std::string>(),
                  j.at("split").get<std::string>()};
}

}  // namespace

std::vector<reward::GoldAnswer> BanditTask::rl_gold() const {
  std::vector<reward::GoldAnswer> out;
  out.reserve(rl_queries.size());
  for (auto q : rl_queries) out.push_back(gold[q]);
  return out;
}

BanditTask build_bandit_task(std::vector<TaskItem> items) {
  if (items.empty()) throw PreconditionError("build_bandit_task: no items");
  BanditTask task;
  auto vocab = std::make_shared<Vocabulary>();
  vocab->feature_dim = 3;
  vocab->feature_names = {"think_tags", "answer_tags", "stepwise"};
  for (std::size_t q = 0; q < items.size(); ++q) {
    const auto& it = items[q];
    if (it.split != "sft" && it.split != "rl") {
      throw PreconditionError("task item '" + it.id + "' has split '" + it.split + "', expected sft or rl");
    }
    auto gold = reward::GoldAnswer::classify(it.answer);
    vocab->query_ids.push_back(it.id);
    vocab->candidates.push_back(candidates_for(it, gold));
    task.gold.push_back(std::move(gold));
    if (it.split == "sft") {
      task.sft.push_back({q, kReasoningCandidate});
    } else {
      task.rl_queries.push_back(q);
    }
  }
  vocab->validate();
  task.vocab = std::move(vocab);
  task.items = std::move(items);
  return task;
}

std::vector<TaskItem> bandit_fixture_items(std::size_t count, std::uint64_t seed) {
  static const std::array<std::string_view, 8> kCategories = {"Alpha", "Beta", "Gamma", "Delta",
                                                              "Epsilon", "Zeta", "Eta", "Theta"};
  Rng rng(seed);
  std::vector<TaskItem> items;
  items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::array<int, 4> v{};
    for (int& x : v) x = 5 + static_cast<int>(rng.below(90));
    std::array<std::string, 4> names;
    const std::size_t offset = rng.below(kCategories.size());
    for (std::size_t k = 0; k < 4; ++k) names[k] = std::string(kCategories[(offset + k) % kCategories.size()]);

    TaskItem it;
    it.id = "bandit-" + std::to_string(i);
    it.split = (i % 7 == 6) ? "rl" : "sft";
    auto bar = [&](std::size_t k) { return "the bar for " + names[k] + " is " + std::to_string(v[k]); };
    switch (i % 4) {
      case 0:
        it.question = "What is the combined value of " + names[0] + " and " + names[1] + "?";
        it.think = "Step 1: " + bar(0) + ". Step 2: " + bar(1) + ". Step 3: " + std::to_string(v[0]) + " + " +
                   std::to_string(v[1]) + " = " + std::to_string(v[0] + v[1]) + ".";
        it.answer = std::to_string(v[0] + v[1]);
        break;
      case 1:
        it.question = "By how much does " + names[2] + " exceed " + names[3] + "?";
        it.think = "Step 1: " + bar(2) + ". Step 2: " + bar(3) + ". Step 3: " + std::to_string(v[2]) + " - " +
                   std::to_string(v[3]) + " = " + std::to_string(v[2] - v[3]) + ".";
        it.answer = std::to_string(v[2] - v[3]);
        break;
      case 2: {
        const auto best = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
        it.question = "Which category has the largest value?";
        it.think = "Step 1: " + bar(0) + ", " + bar(1) + ", " + bar(2) + " and " + bar(3) + ". Step 2: the largest is " +
                   std::to_string(v[best]) + ", which belongs to " + names[best] + ".";
        it.answer = names[best];
        break;
      }
      default: {
        const double mean = (v[0] + v[1] + v[2]) / 3.0;
        it.question = "What is the average of " + names[0] + ", " + names[1] + " and " + names[2] + "?";
        it.think = "Step 1: " + bar(0) + ", " + bar(1) + " and " + bar(2) + ". Step 2: the sum is " +
                   std::to_string(v[0] + v[1] + v[2]) + ". Step 3: dividing by 3 gives " + format_number(std::round(mean * 100.0) / 100.0) + ".";
        it.answer = format_number(std::round(mean * 100.0) / 100.0);
        break;
      }
    }
    items.push_back(std::move(it));
  }
  return items;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["format"] = "chartkit-checkpoint/1";
  j["stage"] = ckpt.stage;
  j["items"] = json::array();
  for (const auto& it : ckpt.items) j["items"].push_back(item_to_json(it));
  j["parameters"] = ckpt.parameters;
  text::write_file(path, j.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("checkpoint does not exist: " + path);
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + path + " is not valid JSON: " + e.what());
  }
  if (j.value("format", "") != "chartkit-checkpoint/1") throw ConfigError("not a chartkit checkpoint: " + path);
  try {
    Checkpoint c;
    c.stage = j.at("stage").get<std::string>();
    for (const auto& it : j.at("items")) c.items.push_back(item_from_json(it));
    c.parameters = j.at("parameters").get<std::vector<double>>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + path + " is incomplete: " + e.what());
  }
}

}  // namespace chartkit::grpo
