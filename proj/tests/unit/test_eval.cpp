#include <algorithm>
#include <random>

#include "chartkit/eval/eval.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace chartkit::eval;
using chartkit::synth::Arity;
using chartkit::synth::ReasoningInstance;

namespace {

std::filesystem::path eval_fixture(const char* name) { return testsupport::fixture_dir() / "eval" / name; }

std::vector<ReasoningInstance> fixture_gold() { return chartkit::synth::read_instances(eval_fixture("gold.jsonl")); }
std::vector<Prediction> fixture_predictions() { return read_predictions(eval_fixture("pred.jsonl")); }

ReasoningInstance gold(std::string id, std::string answer, Arity arity = Arity::Single) {
  ReasoningInstance g;
  g.id = std::move(id);
  g.question = "q";
  g.answer = chartkit::reward::GoldAnswer::classify(std::move(answer));
  g.arity = arity;
  return g;
}

std::string tagged(const std::string& answer) { return "<think>r</think><answer>" + answer + "</answer>"; }

void check_bucket(const Bucket& b, std::size_t n, std::size_t correct, std::size_t format_ok) {
  CHECK(b.n == n);
  CHECK(b.correct == correct);
  CHECK(b.format_ok == format_ok);
}

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("hand-tallied fixture") {
    const auto r = score_all(fixture_predictions(), fixture_gold());
    check_bucket(r.overall, 10, 6, 8);
    check_bucket(r.single, 5, 4, 5);
    check_bucket(r.multi, 5, 2, 3);
    check_bucket(r.numeric, 6, 3, 5);
    check_bucket(r.text, 4, 3, 3);
    CHECK(r.missing == 1);
    CHECK(r.overall.accuracy() == 60.0);
    CHECK(r.single.accuracy() == 80.0);
    CHECK(r.multi.accuracy() == 40.0);
    CHECK(r.numeric.accuracy() == 50.0);
    CHECK(r.text.accuracy() == 75.0);
    CHECK(r.overall.format_compliance() == 80.0);
  }

  TEST_CASE("two of three correct") {
    const std::vector<ReasoningInstance> g = {gold("a", "10"), gold("b", "cat"), gold("c", "7")};
    const std::vector<Prediction> p = {{"a", tagged("10.3")}, {"b", tagged("Cat")}, {"c", tagged("8")}};
    const auto r = score_all(p, g);
    CHECK(r.overall.accuracy() == doctest::Approx(66.67).epsilon(1e-4));
    CHECK(r.overall.correct == 2);
  }

  TEST_CASE("all malformed") {
    const std::vector<ReasoningInstance> g = {gold("a", "1"), gold("b", "x", Arity::Multi)};
    const std::vector<Prediction> p = {{"a", "the answer is 1"}, {"b", "<answer>x</answer>"}};
    const auto r = score_all(p, g);
    CHECK(r.overall.accuracy() == 0.0);
    CHECK(r.overall.format_compliance() == 0.0);
    CHECK(r.missing == 0);
  }

  TEST_CASE("order does not matter") {
    auto g = fixture_gold();
    auto p = fixture_predictions();
    const auto base = score_all(p, g);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
      std::shuffle(g.begin(), g.end(), rng);
      std::shuffle(p.begin(), p.end(), rng);
      CHECK(score_all(p, g) == base);
    }
  }

  TEST_CASE("buckets partition the items") {
    std::mt19937_64 rng(9);
    const std::vector<std::string> answers = {"12", "3.5", "0", "blue", "ResNet-50", "1,200", "north"};
    const std::vector<std::string> outputs = {"12", "3.6", "0", "Blue", "resnet", "1200", "south"};
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<ReasoningInstance> g;
      std::vector<Prediction> p;
      const auto n = 1 + rng() % 30;
      for (std::size_t i = 0; i < n; ++i) {
        const auto id = "x" + std::to_string(i);
        g.push_back(gold(id, answers[rng() % answers.size()], rng() % 2 ? Arity::Multi : Arity::Single));
        const auto roll = rng() % 4;
        if (roll == 0) continue;
        p.push_back({id, roll == 1 ? outputs[rng() % outputs.size()] : tagged(outputs[rng() % outputs.size()])});
      }
      const auto r = score_all(p, g);
      CHECK(r.overall.n == n);
      CHECK(r.single.n + r.multi.n == n);
      CHECK(r.numeric.n + r.text.n == n);
      CHECK(r.single.correct + r.multi.correct == r.overall.correct);
      CHECK(r.numeric.correct + r.text.correct == r.overall.correct);
      CHECK(r.single.format_ok + r.multi.format_ok == r.overall.format_ok);
      CHECK(r.missing == n - p.size());
      CHECK(r.overall.correct <= r.overall.n - r.missing);
    }
  }

  TEST_CASE("thresholds") {
    const std::vector<ReasoningInstance> g = {gold("a", "Paris"), gold("b", "100")};
    const std::vector<Prediction> p = {{"a", tagged("Pari")}, {"b", tagged("104")}};
    CHECK(score_all(p, g).overall.correct == 1);
    EvalOptions loose;
    loose.text_threshold = 0.8;
    const auto r = score_all(p, g, loose);
    CHECK(r.overall.correct == 2);
    CHECK(r.text_threshold == 0.8);
    loose.text_threshold = 0.81;
    CHECK(score_all(p, g, loose).overall.correct == 1);
    EvalOptions tight;
    tight.reward.rel_tol = 0.01;
    CHECK(score_all(p, g, tight).numeric.correct == 0);

    EvalOptions bad;
    bad.numeric_threshold = 0.0;
    CHECK_THROWS_AS(score_all(p, g, bad), chartkit::ConfigError);
    bad.numeric_threshold = 1.5;
    CHECK_THROWS_AS(score_all(p, g, bad), chartkit::ConfigError);
  }

  TEST_CASE("input errors") {
    const std::vector<ReasoningInstance> g = {gold("a", "1")};
    CHECK_THROWS_AS(score_all({{"zz", tagged("1")}}, g), UnknownId);
    CHECK_THROWS_AS(score_all({{"a", tagged("1")}, {"a", tagged("2")}}, g), DuplicateId);
    CHECK_THROWS_AS(score_all({}, {gold("a", "1"), gold("a", "2")}), DuplicateId);
    CHECK_THROWS_AS(score_all({}, {}), EmptyGold);
    const auto r = score_all({}, g);
    CHECK(r.missing == 1);
    CHECK(r.overall.accuracy() == 0.0);
  }
}

TEST_SUITE("reports") {
  TEST_CASE("json round trip") {
    const auto r = score_all(fixture_predictions(), fixture_gold());
    const auto text = render_report(r, ReportFormat::Json);
    const auto back = parse_report_json(text);
    CHECK(back == r);
    CHECK(render_report(back, ReportFormat::Json) == text);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["overall"]["accuracy"].get<double>() == 60.0);
    CHECK(j["buckets"]["text"]["format_compliance"].get<double>() == 75.0);
    CHECK_THROWS_AS(parse_report_json("{}"), chartkit::ConfigError);
    CHECK_THROWS_AS(parse_report_json(R"({"overall":{"n":1,"correct":2,"format_ok":0}})"), chartkit::ConfigError);
  }

  TEST_CASE("markdown") {
    const auto md = render_report(score_all(fixture_predictions(), fixture_gold()), ReportFormat::Markdown);
    CHECK(md.find("| overall | 10 | 60.00 |") != std::string::npos);
    CHECK(md.find("| multi | 5 | 40.00 |") != std::string::npos);
    CHECK(md.find("| text | 4 | 75.00 |") != std::string::npos);
    CHECK(md.find("Format compliance: 80.00% (8/10)") != std::string::npos);
    CHECK(md.find("Missing predictions: 1") != std::string::npos);
    CHECK(md.find("omitted") == std::string::npos);

    const auto only_numeric = render_report(score_all({{"a", tagged("1")}}, {gold("a", "1")}), ReportFormat::Markdown);
    CHECK(only_numeric.find("| text |") == std::string::npos);
    CHECK(only_numeric.find("| multi |") == std::string::npos);
    CHECK(only_numeric.find("omitted: multi, text") != std::string::npos);
  }

  TEST_CASE("format names and prediction files") {
    CHECK(parse_report_format("json") == ReportFormat::Json);
    CHECK(parse_report_format("markdown") == ReportFormat::Markdown);
    CHECK_THROWS_AS(parse_report_format("csv"), chartkit::ConfigError);
    testsupport::TempDir dir;
    testsupport::write_text(dir / "p.jsonl", "{\"id\":\"a\",\"output\":\"x\"}\n\n{\"id\":\"b\"}\n");
    CHECK_THROWS_AS(read_predictions(dir / "p.jsonl"), chartkit::ConfigError);
    CHECK_THROWS_AS(read_predictions(dir / "none.jsonl"), chartkit::ConfigError);
  }
}
