#include <sstream>

#include "chartkit/cli/cli.hpp"
#include "chartkit/grpo/task.hpp"
#include "chartkit/synth/instance.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace chartkit::cli;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "chartkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

const fs::path kRoot = CHARTKIT_SAMPLE_DIR;

std::string fixture(const char* name) { return (testsupport::fixture_dir() / "eval" / name).string(); }

}  // namespace

TEST_SUITE("command line") {
  TEST_CASE("usage errors exit with 1") {
    CHECK(invoke({}).code == kExitValidation);
    const auto unknown = invoke({"frobnicate"});
    CHECK(unknown.code == kExitValidation);
    CHECK(contains(unknown.err, "unknown subcommand 'frobnicate'"));
    CHECK(invoke({"synth", "bogus"}).code == kExitValidation);
    CHECK(invoke({"eval", "score", "--gold", "x"}).code == kExitValidation);
    CHECK(invoke({"train", "rft", "--output", "x", "--kl-beta", "lots"}).code == kExitValidation);
  }

  TEST_CASE("help lists subcommands and defaults") {
    const auto top = invoke({"--help"});
    CHECK(top.code == kExitOk);
    for (const char* s : {"synth", "train", "eval", "check"}) CHECK(contains(top.out, s));
    const auto rft = invoke({"train", "rft", "--help"});
    CHECK(rft.code == kExitOk);
    CHECK(contains(rft.out, "--kl-beta"));
    CHECK(contains(rft.out, "0.04"));
    CHECK(contains(rft.out, "--group-size"));
    CHECK(contains(rft.out, "--require-cot"));
    const auto run_help = invoke({"synth", "run", "--help"});
    CHECK(contains(run_help.out, "--workers"));
    CHECK(contains(run_help.out, "10000"));
  }

  TEST_CASE("synth run with mocks on the bundled config") {
    testsupport::TempDir dir;
    const auto out = dir / "dataset";
    const auto r = invoke({"synth", "run", "--config", (kRoot / "config" / "example.yaml").string(), "--mock", "--output",
                           out.string(), "--seed", "5"});
    INFO(r.err);
    REQUIRE(r.code == kExitOk);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "instances.jsonl"));
    const auto manifest = nlohmann::json::parse(r.out);
    CHECK(manifest["seed"] == 5);
    CHECK(manifest["counts"]["accepted"].get<int>() > 0);
    CHECK(manifest["config"]["llm"]["mode"] == "mock");
    CHECK(contains(r.err, "seed: 5"));
    CHECK(contains(r.err, "resolved config"));

    const auto stats = invoke({"synth", "stats", "--instances", (out / "instances.jsonl").string()});
    CHECK(stats.code == kExitOk);
    CHECK(contains(stats.out, "| all | total |"));

    const auto split_path = dir / "resplit.jsonl";
    const auto sp = invoke({"synth", "split", "--instances", (out / "instances.jsonl").string(), "--output",
                            split_path.string(), "--sft-fraction", "0.5"});
    CHECK(sp.code == kExitOk);
    const auto counts = nlohmann::json::parse(sp.out);
    CHECK(counts["sft"].get<int>() + counts["rl"].get<int>() == manifest["counts"]["accepted"].get<int>());
    CHECK(chartkit::synth::read_instances(split_path).size() == manifest["counts"]["accepted"].get<std::size_t>());
  }

  TEST_CASE("synth run through the executor protocol") {
    testsupport::TempDir dir;
    const auto f = testsupport::make_synth_fixture(dir.path(), 3);
    const auto r = invoke({"synth", "run", "--tables", f.tables.string(), "--seeds", f.seeds.string(), "--chart-types",
                           f.chart_types.string(), "--output", (dir / "out").string(), "--mock-llm", "--executor",
                           CHARTKIT_FAKE_EXECUTOR, "--workers", "2"});
    INFO(r.err);
    REQUIRE(r.code == kExitOk);
    const auto manifest = nlohmann::json::parse(r.out);
    CHECK(manifest["counts"]["accepted"] == 6);
    CHECK(manifest["config"]["executor"]["mode"] == "subprocess");

    const auto missing = invoke({"synth", "run", "--tables", f.tables.string(), "--seeds", f.seeds.string(),
                                 "--chart-types", f.chart_types.string(), "--output", (dir / "out2").string(),
                                 "--mock-llm", "--executor", "/nonexistent/executor"});
    CHECK(missing.code == kExitRuntime);
    const auto bad = invoke({"synth", "run", "--tables", (dir / "nope").string(), "--seeds", f.seeds.string(),
                             "--chart-types", f.chart_types.string(), "--output", (dir / "out3").string(), "--mock"});
    CHECK(bad.code == kExitValidation);
  }

  TEST_CASE("eval score prints the report") {
    const auto r = invoke({"eval", "score", "--pred", fixture("pred.jsonl"), "--gold", fixture("gold.jsonl")});
    REQUIRE(r.code == kExitOk);
    CHECK(nlohmann::json::parse(r.out)["overall"]["accuracy"].get<double>() == 60.0);
    CHECK(contains(r.err, "resolved config"));

    const auto md = invoke(
        {"eval", "score", "--pred", fixture("pred.jsonl"), "--gold", fixture("gold.jsonl"), "--format", "markdown"});
    CHECK(contains(md.out, "| overall | 10 | 60.00 |"));

    testsupport::TempDir dir;
    const auto file = dir / "report.json";
    const auto to_file = invoke(
        {"eval", "score", "--pred", fixture("pred.jsonl"), "--gold", fixture("gold.jsonl"), "--output", file.string()});
    CHECK(to_file.out.empty());
    CHECK(fs::exists(file));

    testsupport::write_text(dir / "stray.jsonl", "{\"id\":\"zz\",\"output\":\"x\"}\n");
    CHECK(invoke({"eval", "score", "--pred", (dir / "stray.jsonl").string(), "--gold", fixture("gold.jsonl")}).code ==
          kExitValidation);
    CHECK(invoke({"eval", "score", "--pred", fixture("pred.jsonl"), "--gold", fixture("gold.jsonl"), "--format", "csv"})
              .code == kExitValidation);
  }

  TEST_CASE("two-stage training") {
    testsupport::TempDir dir;
    const auto toy = (kRoot / "config" / "toy.yaml").string();
    const auto cot = (dir / "cot.json").string();
    const auto c = invoke({"train", "cot", "--config", toy, "--output", cot, "--losses", (dir / "losses.csv").string()});
    INFO(c.err);
    REQUIRE(c.code == kExitOk);
    CHECK(contains(c.err, "seed: 1"));
    const auto cs = nlohmann::json::parse(c.out);
    CHECK(cs["final_loss"].get<double>() < cs["initial_loss"].get<double>());

    const auto refused = invoke({"train", "rft", "--config", toy, "--require-cot", "--output", (dir / "x.json").string()});
    CHECK(refused.code == kExitValidation);
    CHECK(contains(refused.err, "train cot"));

    const auto rft = (dir / "rft.json").string();
    const auto r = invoke({"train", "rft", "--config", toy, "--require-cot", "--init", cot, "--output", rft, "--trace",
                           (dir / "trace.csv").string()});
    INFO(r.err);
    REQUIRE(r.code == kExitOk);
    const auto rs = nlohmann::json::parse(r.out);
    CHECK(rs["steps"] == 300);
    CHECK(rs["final_normalized_reward"].get<double>() > 0.9);
    CHECK(testsupport::read_text(dir / "trace.csv").starts_with("step,"));
    CHECK(chartkit::grpo::load_checkpoint(rft).stage == "rft");

    CHECK(invoke({"train", "rft", "--config", toy, "--require-cot", "--init", rft, "--output", (dir / "y.json").string()})
              .code == kExitValidation);
    CHECK(invoke({"train", "rft", "--init", (dir / "absent.json").string(), "--output", (dir / "z.json").string()}).code ==
          kExitValidation);
  }

  TEST_CASE("gradient self-check") {
    const auto r = invoke({"check", "gradients", "--instances", "3"});
    CHECK(r.code == kExitOk);
    CHECK(contains(r.out, "PASS"));
    CHECK_FALSE(contains(r.out, "FAIL"));
  }
}
