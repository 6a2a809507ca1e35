#include <algorithm>
#include <cmath>
#include <set>

#include "chartkit/rng.hpp"
#include "chartkit/synth/split.hpp"
#include "chartkit/synth/stats.hpp"
#include "doctest.h"

using namespace chartkit::synth;
using chartkit::reward::GoldAnswer;

namespace {

ReasoningInstance make(std::string id, Split split, Arity arity, std::string q, std::string t, std::string a) {
  ReasoningInstance inst;
  inst.id = std::move(id);
  inst.split = split;
  inst.arity = arity;
  inst.question = std::move(q);
  inst.think = std::move(t);
  inst.answer = GoldAnswer::classify(std::move(a));
  return inst;
}

std::vector<ReasoningInstance> numbered(std::size_t n) {
  std::vector<ReasoningInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make("i" + std::to_string(i), Split::Unassigned, i % 2 ? Arity::Multi : Arity::Single, "q", "t", "1"));
  }
  return out;
}

std::vector<std::string> ids(const std::vector<ReasoningInstance>& v) {
  std::vector<std::string> out;
  for (const auto& i : v) out.push_back(i.id);
  return out;
}

// Token counts per instance: question / think / answer.
//   i1  5 / 4 / 1    i2  4 / 7 / 1    i3  6 / 10 / 1
//   i4  4 / 7 / 1    i5  8 / 10 / 1   i6  4 / 4 / 2
std::vector<ReasoningInstance> hand_counted() {
  return {
      make("i1", Split::Sft, Arity::Single, "How many bars are there", "Count the bars: four.", "4"),
      make("i2", Split::Sft, Arity::Single, "What is the max", "The tallest bar is B at 30", "30"),
      make("i3", Split::Sft, Arity::Multi, "Which subplot has the larger total", "Left sums to 10 right sums to 12 so right",
           "right"),
      make("i4", Split::Rl, Arity::Single, "Name the smallest category", "A is 12 which is the smallest", "A"),
      make("i5", Split::Rl, Arity::Multi, "What is the difference between the two peaks",
           "Peak one is 9 peak two is 5 difference 4", "4"),
      make("i6", Split::Rl, Arity::Multi, "Do both panels rise", "Yes both increase monotonically", "yes both"),
  };
}

void check_row(const StatsTable& t, StatsSplit s, StatsArity a, std::size_t n, double q, double th, double ans) {
  CAPTURE(to_string(s));
  CAPTURE(to_string(a));
  const auto& r = t.at(s, a);
  CHECK(r.count == n);
  CHECK(r.question == doctest::Approx(q).epsilon(1e-12));
  CHECK(r.think == doctest::Approx(th).epsilon(1e-12));
  CHECK(r.answer == doctest::Approx(ans).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("split") {
  TEST_CASE("default fraction on 258 instances") {
    const auto r = split_dataset(numbered(258), kDefaultSftFraction, 17);
    CHECK(r.sft.size() == 228);
    CHECK(r.rl.size() == 30);
  }

  TEST_CASE("partition property") {
    for (std::size_t n : {1u, 2u, 7u, 50u, 258u}) {
      for (double f : {0.1, 0.5, kDefaultSftFraction, 0.99}) {
        for (std::uint64_t seed : {0u, 1u, 99u}) {
          const auto input = numbered(n);
          const auto r = split_dataset(input, f, seed);
          CHECK(r.sft.size() + r.rl.size() == n);
          CHECK(r.sft.size() == static_cast<std::size_t>(std::llround(f * static_cast<double>(n))));
          std::set<std::string> seen;
          for (const auto& i : r.sft) {
            CHECK(i.split == Split::Sft);
            seen.insert(i.id);
          }
          for (const auto& i : r.rl) {
            CHECK(i.split == Split::Rl);
            seen.insert(i.id);
          }
          CHECK(seen.size() == n);
          const auto all = ids(input);
          for (const auto* half : {&r.sft, &r.rl}) {
            const auto h = ids(*half);
            CHECK(std::includes(all.begin(), all.end(), h.begin(), h.end(),
                                [&](const std::string& a, const std::string& b) {
                                  return std::find(all.begin(), all.end(), a) < std::find(all.begin(), all.end(), b);
                                }));
          }
        }
      }
    }
  }

  TEST_CASE("seeded") {
    const auto a = split_dataset(numbered(100), 0.8, 3);
    const auto b = split_dataset(numbered(100), 0.8, 3);
    const auto c = split_dataset(numbered(100), 0.8, 4);
    CHECK(ids(a.rl) == ids(b.rl));
    CHECK(ids(a.rl) != ids(c.rl));
  }

  TEST_CASE("fraction bounds") {
    CHECK_THROWS_AS(split_dataset(numbered(4), 0.0, 1), chartkit::PreconditionError);
    CHECK_THROWS_AS(split_dataset(numbered(4), 1.0, 1), chartkit::PreconditionError);
    CHECK_THROWS_AS(split_dataset(numbered(4), -0.5, 1), chartkit::PreconditionError);
    CHECK_THROWS_AS(split_dataset(numbered(4), std::nan(""), 1), chartkit::PreconditionError);
  }
}

TEST_SUITE("stats") {
  TEST_CASE("hand-counted table") {
    const auto t = compute_stats(hand_counted());
    CHECK_FALSE(t.empty);
    check_row(t, StatsSplit::Sft, StatsArity::Single, 2, 4.5, 5.5, 1.0);
    check_row(t, StatsSplit::Sft, StatsArity::Multi, 1, 6.0, 10.0, 1.0);
    check_row(t, StatsSplit::Sft, StatsArity::Total, 3, 5.0, 7.0, 1.0);
    check_row(t, StatsSplit::Rl, StatsArity::Single, 1, 4.0, 7.0, 1.0);
    check_row(t, StatsSplit::Rl, StatsArity::Multi, 2, 6.0, 7.0, 1.5);
    check_row(t, StatsSplit::Rl, StatsArity::Total, 3, 16.0 / 3.0, 7.0, 4.0 / 3.0);
    check_row(t, StatsSplit::All, StatsArity::Single, 3, 13.0 / 3.0, 6.0, 1.0);
    check_row(t, StatsSplit::All, StatsArity::Multi, 3, 6.0, 8.0, 4.0 / 3.0);
    check_row(t, StatsSplit::All, StatsArity::Total, 6, 31.0 / 6.0, 7.0, 7.0 / 6.0);
  }

  TEST_CASE("means of four and six tokens") {
    const std::vector<ReasoningInstance> v = {
        make("a", Split::Sft, Arity::Single, "one two three four", "x", "1"),
        make("b", Split::Sft, Arity::Single, "one two three four five six", "x", "1"),
    };
    CHECK(compute_stats(v).at(StatsSplit::Sft, StatsArity::Single).question == 5.0);
  }

  TEST_CASE("total is the count-weighted mean of its parts") {
    std::vector<ReasoningInstance> v;
    chartkit::Rng rng(8);
    for (int i = 0; i < 200; ++i) {
      std::string q;
      for (std::size_t k = 0, n = 1 + rng.below(30); k < n; ++k) q += "w ";
      const auto split = rng.below(3) == 0 ? Split::Rl : (rng.below(5) == 0 ? Split::Unassigned : Split::Sft);
      v.push_back(make("x" + std::to_string(i), split, rng.below(2) ? Arity::Multi : Arity::Single, q, q + q, "a b"));
    }
    const auto t = compute_stats(v);
    for (auto s : {StatsSplit::Sft, StatsSplit::Rl, StatsSplit::All}) {
      const auto& a = t.at(s, StatsArity::Single);
      const auto& b = t.at(s, StatsArity::Multi);
      const auto& tot = t.at(s, StatsArity::Total);
      CHECK(a.count + b.count == tot.count);
      const double weighted = (a.question * a.count + b.question * b.count) / static_cast<double>(tot.count);
      CHECK(std::fabs(weighted - tot.question) < 1e-9);
      CHECK(std::fabs(tot.think - 2.0 * tot.question) < 1e-9);
    }
    CHECK(t.at(StatsSplit::All, StatsArity::Total).count == 200);
    CHECK(t.at(StatsSplit::Sft, StatsArity::Total).count + t.at(StatsSplit::Rl, StatsArity::Total).count < 200);
  }

  TEST_CASE("custom tokenizer") {
    const auto t = compute_stats(hand_counted(), [](std::string_view s) { return s.size(); });
    CHECK(t.at(StatsSplit::Sft, StatsArity::Multi).answer == 5.0);
  }

  TEST_CASE("empty input") {
    const auto t = compute_stats({});
    CHECK(t.empty);
    CHECK(t.at(StatsSplit::All, StatsArity::Total).count == 0);
    CHECK(t.at(StatsSplit::All, StatsArity::Total).question == 0.0);
    CHECK(render_stats_markdown(t).find("empty") != std::string::npos);
    CHECK(stats_to_json(t)["empty"] == true);
  }

  TEST_CASE("rendering") {
    const auto t = compute_stats(hand_counted());
    const auto md = render_stats_markdown(t);
    CHECK(md.starts_with("| split | arity | N | question | think | answer |\n"));
    CHECK(md.find("| rl | total | 3 | 5.33 | 7.00 | 1.33 |\n") != std::string::npos);
    CHECK(md.find("| all | total | 6 | 5.17 | 7.00 | 1.17 |\n") != std::string::npos);
    CHECK(md.find("empty") == std::string::npos);
    const auto j = stats_to_json(t);
    CHECK(j["sft"]["single"]["count"] == 2);
    CHECK(j["rl"]["multi"]["answer"].get<double>() == 1.5);
    CHECK(j["all"]["total"]["think"].get<double>() == 7.0);
  }
}
