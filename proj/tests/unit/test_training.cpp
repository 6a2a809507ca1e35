#include <cmath>
#include <sstream>

#include "chartkit/grpo/task.hpp"
#include "chartkit/grpo/training.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "toy_runs.hpp"

using namespace chartkit::grpo;
namespace reward = chartkit::reward;

TEST_SUITE("cot") {
  TEST_CASE("single query converges on its target") {
    auto p = oracle::categorical_policy({{0.25, 0.25, 0.25, 0.25}});
    const std::vector<SftExample> data = {{0, 2}};
    SftConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.max_steps = 500;
    const auto r = train_cot(p, data, cfg);
    CHECK(r.policy.probs(0)[2] > 0.95);
    CHECK(r.losses.size() == 501);
    CHECK(r.losses.back() < r.losses.front());
  }

  TEST_CASE("loss never increases on the bandit fixture") {
    const auto task = build_bandit_task(bandit_fixture_items());
    const ToyPolicy init(task.vocab);
    const auto r = train_cot(init, task.sft, testsupport::toy_sft_config());
    REQUIRE(r.losses.size() == 201);
    CHECK(std::fabs(r.losses.front() - std::log(8.0)) < 1e-10);
    for (std::size_t i = 1; i < r.losses.size(); ++i) CHECK(r.losses[i] <= r.losses[i - 1]);
  }

  TEST_CASE("mini-batches are seeded") {
    const auto task = build_bandit_task(bandit_fixture_items(21));
    const ToyPolicy init(task.vocab);
    SftConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    cfg.seed = 5;
    const auto a = train_cot(init, task.sft, cfg);
    const auto b = train_cot(init, task.sft, cfg);
    CHECK(a.policy.parameters() == b.policy.parameters());
    CHECK(a.losses.size() == 1 + 2 * ((task.sft.size() + 3) / 4));
  }

  TEST_CASE("invalid configuration") {
    const auto task = build_bandit_task(bandit_fixture_items(14));
    SftConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train_cot(ToyPolicy(task.vocab), task.sft, cfg), chartkit::ConfigError);
    CHECK_THROWS_AS(train_cot(ToyPolicy(task.vocab), std::span<const SftExample>{}, SftConfig{}), EmptyBatch);
  }
}

TEST_SUITE("task") {
  TEST_CASE("fixture layout") {
    const auto items = bandit_fixture_items();
    REQUIRE(items.size() == 70);
    const auto task = build_bandit_task(items);
    CHECK(task.rl_queries.size() == 10);
    CHECK(task.sft.size() == 60);
    CHECK(bandit_fixture_items().front().question == items.front().question);
    for (std::size_t q = 0; q < task.vocab->query_ids.size(); ++q) {
      const auto& cands = task.vocab->candidates[q];
      const auto top = reward::total_reward(cands[kReasoningCandidate].text, task.gold[q]);
      CHECK(top.total == 2.0);
      const auto wrong = reward::total_reward(cands[1].text, task.gold[q]);
      CHECK(wrong.format == 1.0);
      CHECK(wrong.total < 2.0);
      for (std::size_t r = 4; r < cands.size(); ++r) {
        CHECK(reward::total_reward(cands[r].text, task.gold[q]).format == 0.0);
      }
    }
  }

  TEST_CASE("items need a split") {
    auto items = bandit_fixture_items(3);
    items[1].split = "unassigned";
    CHECK_THROWS_AS(build_bandit_task(items), chartkit::PreconditionError);
  }

  TEST_CASE("checkpoint round trip") {
    testsupport::TempDir dir;
    Checkpoint c;
    c.stage = "cot";
    c.items = bandit_fixture_items(5);
    c.parameters = {0.1, -2.5, 1e-17, 3.0};
    const auto path = (dir / "ck.json").string();
    save_checkpoint(path, c);
    const auto back = load_checkpoint(path);
    CHECK(back.stage == "cot");
    CHECK(back.parameters == c.parameters);
    REQUIRE(back.items.size() == 5);
    CHECK(back.items[4].answer == c.items[4].answer);

    testsupport::write_text(dir / "bad.json", "{\"format\": \"other\"}");
    CHECK_THROWS_AS(load_checkpoint((dir / "bad.json").string()), chartkit::ConfigError);
    testsupport::write_text(dir / "partial.json", "{\"format\": \"chartkit-checkpoint/1\", \"stage\": \"cot\"}");
    CHECK_THROWS_AS(load_checkpoint((dir / "partial.json").string()), chartkit::ConfigError);
    CHECK_THROWS_AS(load_checkpoint((dir / "absent.json").string()), chartkit::ConfigError);
  }
}

TEST_SUITE("rft") {
  TEST_CASE("two-stage schedule") {
    const auto runs = testsupport::run_toy_training();
    const auto& cot = runs.from_cot.trace.records;
    const auto& scratch = runs.from_scratch.trace.records;
    REQUIRE(cot.size() == 300);
    REQUIRE(scratch.size() == 300);
    CHECK(cot.back().normalized_reward > 0.9);
    CHECK(scratch[49].normalized_reward < cot[49].normalized_reward);
    for (const auto& r : cot) {
      CHECK(r.normalized_reward == doctest::Approx(r.mean_total_reward / 2.0));
      CHECK(r.mean_response_length >= 0.0);
      CHECK(r.exact_kl >= 0.0);
    }
  }

  TEST_CASE("a heavy KL weight keeps the policy at its anchor") {
    const auto task = build_bandit_task(bandit_fixture_items());
    const ToyPolicy init(task.vocab);
    auto max_kl = [&](double beta) {
      auto cfg = testsupport::toy_grpo_config();
      cfg.kl_beta = beta;
      cfg.learning_rate = 1e-3;
      cfg.max_steps = 1500;
      const auto r = train_rft(init, task.rl_queries, task.rl_gold(), reward::RewardConfig{}, cfg);
      double worst = 0.0;
      for (auto q : task.rl_queries) worst = std::max(worst, exact_kl(r.policy, init, q));
      return worst;
    };
    CHECK(max_kl(0.0) > 0.01);
    CHECK(max_kl(1e3) <= 0.01);
  }

  TEST_CASE("identical rewards and no KL leave parameters unchanged") {
    auto vocab = std::make_shared<Vocabulary>();
    vocab->query_ids = {"q"};
    vocab->candidates = {{{"<think>a</think><answer>1</answer>", {}, 1}, {"<think>b</think><answer>1</answer>", {}, 1}}};
    ToyPolicy init(vocab);
    init.bias(0)[0] = 0.3;
    auto cfg = testsupport::toy_grpo_config();
    cfg.kl_beta = 0.0;
    cfg.max_steps = 20;
    const std::vector<std::size_t> queries = {0};
    const std::vector<reward::GoldAnswer> gold = {reward::GoldAnswer::classify("1")};
    const auto r = train_rft(init, queries, gold, reward::RewardConfig{}, cfg);
    CHECK(r.policy.parameters() == init.parameters());
  }

  TEST_CASE("bit-for-bit reproducible") {
    const auto task = build_bandit_task(bandit_fixture_items(28));
    auto cfg = testsupport::toy_grpo_config();
    cfg.max_steps = 30;
    cfg.batch_size = 2;
    const ToyPolicy init(task.vocab);
    const auto a = train_rft(init, task.rl_queries, task.rl_gold(), reward::RewardConfig{}, cfg);
    const auto b = train_rft(init, task.rl_queries, task.rl_gold(), reward::RewardConfig{}, cfg);
    CHECK(a.policy.parameters() == b.policy.parameters());
    std::ostringstream sa;
    std::ostringstream sb;
    a.trace.write_csv(sa);
    b.trace.write_csv(sb);
    CHECK(sa.str() == sb.str());
  }

  TEST_CASE("trace serialization") {
    TrainingTrace t;
    t.records.push_back({1, 1.5, 0.75, 0.5, 1.0, 12.0, -0.1, 0.02});
    std::ostringstream csv;
    t.write_csv(csv);
    CHECK(csv.str().starts_with("step,mean_total_reward,normalized_reward,mean_accuracy_reward,mean_format_reward,"
                                "mean_response_length,objective,exact_kl\n1,1.5,0.75,0.5,1,12,"));
    std::ostringstream jl;
    t.write_jsonl(jl);
    const auto j = nlohmann::json::parse(jl.str());
    CHECK(j["exact_kl"].get<double>() == 0.02);
    CHECK(j["step"].get<int>() == 1);
  }

  TEST_CASE("argument checks") {
    const auto task = build_bandit_task(bandit_fixture_items(14));
    const ToyPolicy init(task.vocab);
    auto cfg = testsupport::toy_grpo_config();
    cfg.group_size = 1;
    CHECK_THROWS_AS(train_rft(init, task.rl_queries, task.rl_gold(), reward::RewardConfig{}, cfg),
                    chartkit::ConfigError);
    cfg = testsupport::toy_grpo_config();
    const std::vector<reward::GoldAnswer> none;
    CHECK_THROWS_AS(train_rft(init, task.rl_queries, none, reward::RewardConfig{}, cfg), chartkit::PreconditionError);
  }
}
