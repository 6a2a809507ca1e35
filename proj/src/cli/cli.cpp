#include "chartkit/cli/cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "chartkit/cli/config.hpp"
#include "chartkit/eval/eval.hpp"
#include "chartkit/grpo/gradcheck.hpp"
#include "chartkit/grpo/task.hpp"
#include "chartkit/grpo/training.hpp"
#include "chartkit/synth/instance.hpp"
#include "chartkit/synth/pipeline.hpp"
#include "chartkit/synth/split.hpp"
#include "chartkit/synth/stats.hpp"
#include "chartkit/text.hpp"

namespace chartkit::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}
template <typename T>
  requires std::is_integral_v<T>
std::string show(T v) {
  return std::to_string(v);
}

template <typename T, typename D>
CLI::Option* add(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& desc,
                 const D& def) {
  return app->add_option(name, target, desc)->default_str(show(def));
}

template <typename T>
void apply(const std::optional<T>& flag, T& into) {
  if (flag) into = *flag;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "YAML config file")->default_str("\"\"");
    app->add_option("--seed", seed, "Random seed for every stage (overrides the config)")->default_str("0");
  }

  ToolConfig load() const {
    auto cfg = config.empty() ? default_config() : load_config(config);
    if (seed) cfg.seed = *seed;
    cfg.propagate_seed();
    return cfg;
  }
};

struct SynthRunFlags {
  Common common;
  std::optional<std::string> tables, seeds, chart_types, output;
  std::vector<std::string> arities;
  std::optional<std::size_t> workers, pairs_per_table;
  std::optional<std::int64_t> timeout_ms;
  std::optional<double> sft_fraction;
  bool mock = false, mock_llm = false, mock_executor = false;
  std::optional<std::string> fixtures, executor;
  std::vector<std::string> fail_ids;
};

struct SynthStatsFlags {
  std::string instances;
  std::string format = "markdown";
};

struct SynthSplitFlags {
  Common common;
  std::string instances, output;
  std::optional<double> sft_fraction;
};

struct TrainCotFlags {
  Common common;
  std::string data, output, losses;
  std::size_t fixture_items = 70;
  std::optional<double> lr;
  std::optional<std::size_t> epochs, batch_size, max_steps;
};

struct TrainRftFlags {
  Common common;
  std::string init, data, output, trace;
  std::size_t fixture_items = 70;
  bool require_cot = false;
  std::size_t log_every = 50;
  std::optional<double> lr, clip_eps, kl_beta, rel_tol;
  std::optional<std::size_t> group_size, epochs, batch_size, max_steps, inner_updates;
};

struct EvalFlags {
  Common common;
  std::string pred, gold, output;
  std::string format = "json";
  std::optional<double> numeric_threshold, text_threshold, rel_tol;
};

struct GradFlags {
  std::string objective = "all";
  std::vector<double> betas = {0.0, 0.04};
  std::size_t instances = 20;
  double tol = 1e-5;
  std::uint64_t seed = 7;
};

using Logger = std::shared_ptr<spdlog::logger>;

void log_resolved(const Logger& log, const ToolConfig& cfg) {
  log->info("seed: {}", cfg.seed);
  log->info("resolved config: {}", to_json(cfg).dump());
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    text::write_file(path, content);
  }
}

int synth_run(const SynthRunFlags& f, const Logger& log, std::ostream& out) {
  auto cfg = f.common.load();
  auto& p = cfg.pipeline;
  if (f.tables) p.tables_dir = *f.tables;
  if (f.seeds) p.seeds_dir = *f.seeds;
  if (f.chart_types) p.chart_types = *f.chart_types;
  if (f.output) p.output_dir = *f.output;
  if (!f.arities.empty()) {
    p.arities.clear();
    for (const auto& a : f.arities) p.arities.push_back(synth::parse_arity(a));
  }
  apply(f.workers, p.workers);
  apply(f.pairs_per_table, p.pairs_per_table);
  apply(f.timeout_ms, p.timeout_ms);
  apply(f.sft_fraction, p.sft_fraction);
  if (f.mock || f.mock_llm) cfg.llm_mock = true;
  if (f.mock || f.mock_executor) cfg.executor_mock = true;
  if (f.fixtures) cfg.llm_fixtures = fs::path(*f.fixtures);
  apply(f.executor, cfg.executor_command);
  log_resolved(log, cfg);
  p.validate();

  std::unique_ptr<synth::LlmClient> client;
  if (cfg.llm_mock) {
    client = std::make_unique<synth::MockLlmClient>(cfg.llm_fixtures);
  } else {
    client = std::make_unique<synth::HttpLlmClient>(cfg.llm);
  }

  synth::ExecutorFactory factory;
  if (cfg.executor_mock) {
    synth::MockExecutorOptions opts;
    opts.fail_ids.insert(f.fail_ids.begin(), f.fail_ids.end());
    factory = [opts] { return std::make_unique<synth::MockExecutor>(opts); };
  } else {
    if (cfg.executor_command.empty()) {
      throw ConfigError("executor.command is not set; pass --executor or --mock-executor");
    }
    const auto argv = synth::split_command(cfg.executor_command);
    const auto sandbox = fs::absolute(p.output_dir).string();
    const auto grace = std::chrono::milliseconds(cfg.executor_grace_ms);
    factory = [argv, sandbox, grace] { return std::make_unique<synth::SubprocessExecutor>(argv, sandbox, grace); };
  }

  p.annotations["llm"] = {{"mode", cfg.llm_mock ? "mock" : "http"},
                          {"fixtures", cfg.llm_fixtures ? cfg.llm_fixtures->generic_string() : ""},
                          {"base_url", cfg.llm_mock ? "" : cfg.llm.base_url},
                          {"api_key", mask_secret(cfg.llm_mock ? "" : cfg.llm.api_key)},
                          {"model", cfg.llm.model},
                          {"temperature", cfg.llm.temperature}};
  p.annotations["executor"] = {{"mode", cfg.executor_mock ? "mock" : "subprocess"},
                               {"command", cfg.executor_mock ? "" : cfg.executor_command}};

  const auto m = synth::run_pipeline(p, *client, factory);
  log->info("generated {} | execution_failed {} | format_rejected {} | accepted {} | sft {} | rl {}",
            m.counts.generated, m.counts.execution_failed, m.counts.format_rejected, m.counts.accepted, m.sft_size,
            m.rl_size);
  log->info("wrote {}", (p.output_dir / "manifest.json").string());
  out << m.to_json().dump(2) << "\n";
  return kExitOk;
}

int synth_stats(const SynthStatsFlags& f, std::ostream& out) {
  if (f.format != "json" && f.format != "markdown") throw ConfigError("--format must be json or markdown");
  const auto table = synth::compute_stats(synth::read_instances(f.instances));
  out << (f.format == "json" ? synth::stats_to_json(table).dump(2) + "\n" : synth::render_stats_markdown(table));
  return kExitOk;
}

int synth_split(const SynthSplitFlags& f, const Logger& log, std::ostream& out) {
  auto cfg = f.common.load();
  apply(f.sft_fraction, cfg.pipeline.sft_fraction);
  log_resolved(log, cfg);
  const double frac = cfg.pipeline.sft_fraction;
  if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("--sft-fraction must lie in (0, 1)");
  auto instances = synth::read_instances(f.instances);
  const auto split = synth::split_dataset(instances, frac, cfg.seed);
  std::unordered_map<std::string, synth::Split> assigned;
  for (const auto& s : split.sft) assigned.emplace(s.id, synth::Split::Sft);
  for (const auto& s : split.rl) assigned.emplace(s.id, synth::Split::Rl);
  if (assigned.size() != instances.size()) throw ConfigError("instance ids are not unique in " + f.instances);
  for (auto& inst : instances) inst.split = assigned.at(inst.id);
  synth::write_instances(f.output, instances);
  log->info("sft {} | rl {} -> {}", split.sft.size(), split.rl.size(), f.output);
  out << ordered_json{{"sft", split.sft.size()}, {"rl", split.rl.size()}}.dump() << "\n";
  return kExitOk;
}

std::vector<grpo::TaskItem> task_items(const std::string& data, std::size_t fixture_items) {
  if (data.empty()) return grpo::bandit_fixture_items(fixture_items);
  std::vector<grpo::TaskItem> items;
  for (const auto& inst : synth::read_instances(data)) {
    if (inst.split == synth::Split::Unassigned) {
      throw ConfigError("instance " + inst.id + " has no split; run `synth split` first");
    }
    items.push_back({inst.id, inst.question, inst.think, inst.answer.raw, std::string(synth::to_string(inst.split))});
  }
  return items;
}

int train_cot(const TrainCotFlags& f, const Logger& log, std::ostream& out) {
  auto cfg = f.common.load();
  apply(f.lr, cfg.sft.learning_rate);
  apply(f.epochs, cfg.sft.epochs);
  apply(f.batch_size, cfg.sft.batch_size);
  apply(f.max_steps, cfg.sft.max_steps);
  log_resolved(log, cfg);
  cfg.sft.validate();

  auto task = grpo::build_bandit_task(task_items(f.data, f.fixture_items));
  if (task.sft.empty()) throw ConfigError("no SFT items in the training data");
  const grpo::ToyPolicy init(task.vocab);
  const auto res = grpo::train_cot(init, task.sft, cfg.sft);
  grpo::save_checkpoint(f.output, {"cot", task.items, res.policy.parameters()});
  if (!f.losses.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "step,loss\n";
    for (std::size_t i = 0; i < res.losses.size(); ++i) csv << i << ',' << res.losses[i] << '\n';
    text::write_file(f.losses, csv.str());
  }
  log->info("sft loss {:.6f} -> {:.6f} over {} steps; checkpoint {}", res.losses.front(), res.losses.back(),
            res.losses.size() - 1, f.output);
  out << ordered_json{{"steps", res.losses.size() - 1},
                      {"initial_loss", res.losses.front()},
                      {"final_loss", res.losses.back()},
                      {"checkpoint", f.output}}
             .dump()
      << "\n";
  return kExitOk;
}

int train_rft(const TrainRftFlags& f, const Logger& log, std::ostream& out) {
  auto cfg = f.common.load();
  auto& g = cfg.grpo;
  apply(f.lr, g.learning_rate);
  apply(f.clip_eps, g.clip_eps);
  apply(f.kl_beta, g.kl_beta);
  apply(f.group_size, g.group_size);
  apply(f.epochs, g.epochs);
  apply(f.batch_size, g.batch_size);
  apply(f.max_steps, g.max_steps);
  apply(f.inner_updates, g.inner_updates);
  apply(f.rel_tol, cfg.reward.rel_tol);
  log_resolved(log, cfg);
  g.validate();
  cfg.reward.validate();

  if (f.require_cot && f.init.empty()) {
    throw ConfigError("--require-cot is set but no checkpoint was given: run `train cot` first and pass it with --init");
  }
  std::optional<grpo::BanditTask> task;
  std::vector<double> params;
  if (!f.init.empty()) {
    if (!f.data.empty()) throw ConfigError("--data cannot be combined with --init; the checkpoint carries its items");
    auto ckpt = grpo::load_checkpoint(f.init);
    if (f.require_cot && ckpt.stage != "cot") {
      throw ConfigError("--require-cot: checkpoint " + f.init + " comes from stage '" + ckpt.stage +
                        "', not from `train cot`");
    }
    task = grpo::build_bandit_task(std::move(ckpt.items));
    params = std::move(ckpt.parameters);
  } else {
    task = grpo::build_bandit_task(task_items(f.data, f.fixture_items));
  }
  if (task->rl_queries.empty()) throw ConfigError("no RL items in the training data");
  grpo::ToyPolicy init(task->vocab);
  if (!params.empty()) {
    if (params.size() != init.num_parameters()) throw ConfigError("checkpoint parameters do not match its items");
    init.set_parameters(params);
  }
  const auto gold = task->rl_gold();
  const std::size_t every = std::max<std::size_t>(f.log_every, 1);
  const auto res = grpo::train_rft(init, task->rl_queries, gold, cfg.reward, g, [&](const grpo::TraceRecord& r) {
    if (r.step == 1 || r.step % every == 0) {
      log->info("step {} reward {:.4f} (normalized {:.4f}) kl {:.5f}", r.step, r.mean_total_reward,
                r.normalized_reward, r.exact_kl);
    }
  });
  if (!f.trace.empty()) res.trace.save(f.trace);
  grpo::save_checkpoint(f.output, {"rft", task->items, res.policy.parameters()});
  const auto& recs = res.trace.records;
  ordered_json summary{{"steps", recs.size()}, {"checkpoint", f.output}};
  if (!recs.empty()) {
    summary["first_normalized_reward"] = recs.front().normalized_reward;
    summary["final_normalized_reward"] = recs.back().normalized_reward;
    summary["final_exact_kl"] = recs.back().exact_kl;
  }
  out << summary.dump() << "\n";
  return kExitOk;
}

int eval_score(const EvalFlags& f, const Logger& log, std::ostream& out) {
  auto cfg = f.common.load();
  apply(f.numeric_threshold, cfg.numeric_threshold);
  apply(f.text_threshold, cfg.text_threshold);
  apply(f.rel_tol, cfg.reward.rel_tol);
  log_resolved(log, cfg);
  const auto format = eval::parse_report_format(f.format);
  const auto options = cfg.eval_options();
  options.validate();
  const auto report = eval::score_all(eval::read_predictions(f.pred), synth::read_instances(f.gold), options);
  log->info("overall {:.2f}% over {} items ({} missing predictions)", report.overall.accuracy(), report.overall.n,
            report.missing);
  write_output(f.output, eval::render_report(report, format), out);
  return kExitOk;
}

int check_gradients(const GradFlags& f, const Logger& log, std::ostream& out) {
  log->info("seed: {}", f.seed);
  std::vector<grpo::ObjectiveKind> kinds;
  if (f.objective == "all") {
    kinds = {grpo::ObjectiveKind::SftNll, grpo::ObjectiveKind::Grpo};
  } else {
    kinds = {grpo::parse_objective_kind(f.objective)};
  }
  if (f.instances == 0) throw ConfigError("--instances must be at least 1");
  if (!(f.tol > 0.0)) throw ConfigError("--tol must be positive");
  bool all_passed = true;
  for (auto kind : kinds) {
    const std::vector<double> betas = kind == grpo::ObjectiveKind::Grpo ? f.betas : std::vector<double>{0.0};
    for (double beta : betas) {
      grpo::GradCheckOptions opt;
      opt.instances = f.instances;
      opt.tol = f.tol;
      opt.seed = f.seed;
      opt.kl_beta = beta;
      const auto rep = grpo::gradient_check(kind, opt);
      all_passed = all_passed && rep.passed;
      char line[160];
      std::snprintf(line, sizeof(line), "%-8s beta=%-6g instances=%zu max_rel_error=%.3e tol=%.1e %s\n",
                    std::string(grpo::to_string(kind)).c_str(), kind == grpo::ObjectiveKind::Grpo ? beta : 0.0,
                    rep.instances, rep.max_rel_error, rep.tol, rep.passed ? "PASS" : "FAIL");
      out << line;
    }
  }
  return all_passed ? kExitOk : kExitRuntime;
}

const CLI::App* deepest(const CLI::App* app) {
  for (const auto* sub : app->get_subcommands()) {
    if (sub->parsed()) return deepest(sub);
  }
  return app;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("chartkit", sink);
  log->set_pattern("[chartkit] %v");

  CLI::App app{"chartkit: chart reasoning data synthesis, toy two-stage training and evaluation", "chartkit"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(44);
  const ToolConfig defaults;

  auto* synth = app.add_subcommand("synth", "Synthesize, split and describe reasoning datasets");
  synth->require_subcommand(1);

  SynthRunFlags sr;
  auto* sr_cmd = synth->add_subcommand("run", "Run the synthesis pipeline");
  sr.common.attach(sr_cmd);
  sr_cmd->add_option("--tables", sr.tables, "Directory of .csv/.tsv tables")->default_str("\"\"");
  sr_cmd->add_option("--seeds", sr.seeds, "Directory of seed .py plotting scripts")->default_str("\"\"");
  sr_cmd->add_option("--chart-types", sr.chart_types, "Chart type tag file")->default_str("\"\"");
  sr_cmd->add_option("--output", sr.output, "Output dataset directory")->default_str("\"\"");
  sr_cmd->add_option("--arities", sr.arities, "Arities to synthesize (single, multi)")->default_str("single multi");
  add(sr_cmd, "--workers", sr.workers, "Worker threads", defaults.pipeline.workers);
  add(sr_cmd, "--timeout-ms", sr.timeout_ms, "Per-script execution timeout", defaults.pipeline.timeout_ms);
  add(sr_cmd, "--sft-fraction", sr.sft_fraction, "Fraction of accepted instances assigned to SFT",
      defaults.pipeline.sft_fraction);
  add(sr_cmd, "--pairs-per-table", sr.pairs_per_table, "Seeds sampled per table (0 = all)",
      defaults.pipeline.pairs_per_table);
  sr_cmd->add_flag("--mock", sr.mock, "Use the mock LLM and the mock executor");
  sr_cmd->add_flag("--mock-llm", sr.mock_llm, "Use the mock LLM client");
  sr_cmd->add_flag("--mock-executor", sr.mock_executor, "Use the in-process mock executor");
  sr_cmd->add_option("--fixtures", sr.fixtures, "Mock completion fixtures (<prompt hash>.txt)")->default_str("\"\"");
  sr_cmd->add_option("--executor", sr.executor, "Executor server command line")->default_str("\"\"");
  sr_cmd->add_option("--mock-fail-id", sr.fail_ids, "Item ids the mock executor fails")->default_str("\"\"");

  SynthStatsFlags ss;
  auto* ss_cmd = synth->add_subcommand("stats", "Average question/think/answer lengths of an instance file");
  ss_cmd->add_option("--instances", ss.instances, "Instance JSONL")->required();
  ss_cmd->add_option("--format", ss.format, "json or markdown")->capture_default_str();

  SynthSplitFlags sp;
  auto* sp_cmd = synth->add_subcommand("split", "Assign instances to disjoint SFT and RL splits");
  sp.common.attach(sp_cmd);
  sp_cmd->add_option("--instances", sp.instances, "Input instance JSONL")->required();
  sp_cmd->add_option("--output", sp.output, "Output instance JSONL")->required();
  add(sp_cmd, "--sft-fraction", sp.sft_fraction, "Fraction assigned to SFT", defaults.pipeline.sft_fraction);

  auto* train = app.add_subcommand("train", "Two-stage toy training");
  train->require_subcommand(1);

  const grpo::SftConfig sft_defaults;
  TrainCotFlags tc;
  auto* tc_cmd = train->add_subcommand("cot", "Supervised stage on step-by-step targets");
  tc.common.attach(tc_cmd);
  tc_cmd->add_option("--data", tc.data, "Split instance JSONL (default: bundled fixture)")->default_str("\"\"");
  tc_cmd->add_option("--fixture-items", tc.fixture_items, "Size of the bundled fixture")->capture_default_str();
  tc_cmd->add_option("--output", tc.output, "Checkpoint to write")->required();
  tc_cmd->add_option("--losses", tc.losses, "CSV of the loss after every step")->default_str("\"\"");
  add(tc_cmd, "--lr", tc.lr, "Learning rate", sft_defaults.learning_rate);
  add(tc_cmd, "--epochs", tc.epochs, "Epochs", sft_defaults.epochs);
  add(tc_cmd, "--batch-size", tc.batch_size, "Mini-batch size", sft_defaults.batch_size);
  add(tc_cmd, "--max-steps", tc.max_steps, "Steps (0 = epochs * batches)", sft_defaults.max_steps);

  const grpo::GrpoConfig grpo_defaults;
  TrainRftFlags tr;
  auto* tr_cmd = train->add_subcommand("rft", "Reinforcement stage with group-relative policy optimization");
  tr.common.attach(tr_cmd);
  tr_cmd->add_option("--init", tr.init, "Checkpoint to start from (default: untrained policy)")->default_str("\"\"");
  tr_cmd->add_flag("--require-cot", tr.require_cot, "Refuse to run without a `train cot` checkpoint");
  tr_cmd->add_option("--data", tr.data, "Split instance JSONL when no --init is given")->default_str("\"\"");
  tr_cmd->add_option("--fixture-items", tr.fixture_items, "Size of the bundled fixture")->capture_default_str();
  tr_cmd->add_option("--output", tr.output, "Checkpoint to write")->required();
  tr_cmd->add_option("--trace", tr.trace, "Per-step trace (.csv or .jsonl)")->default_str("\"\"");
  tr_cmd->add_option("--log-every", tr.log_every, "Log every N steps")->capture_default_str();
  add(tr_cmd, "--lr", tr.lr, "Learning rate", grpo_defaults.learning_rate);
  add(tr_cmd, "--group-size", tr.group_size, "Responses sampled per query", grpo_defaults.group_size);
  add(tr_cmd, "--clip-eps", tr.clip_eps, "Ratio clip range", grpo_defaults.clip_eps);
  add(tr_cmd, "--kl-beta", tr.kl_beta, "KL penalty weight", grpo_defaults.kl_beta);
  add(tr_cmd, "--epochs", tr.epochs, "Epochs", grpo_defaults.epochs);
  add(tr_cmd, "--batch-size", tr.batch_size, "Queries per step", grpo_defaults.batch_size);
  add(tr_cmd, "--max-steps", tr.max_steps, "Steps (0 = epochs * batches)", grpo_defaults.max_steps);
  add(tr_cmd, "--inner-updates", tr.inner_updates, "Gradient steps per sampled batch", grpo_defaults.inner_updates);
  add(tr_cmd, "--rel-tol", tr.rel_tol, "Numeric relative tolerance", defaults.reward.rel_tol);

  auto* ev = app.add_subcommand("eval", "Score predictions");
  ev->require_subcommand(1);
  EvalFlags ef;
  auto* ef_cmd = ev->add_subcommand("score", "Score a prediction file against gold instances");
  ef.common.attach(ef_cmd);
  ef_cmd->add_option("--pred", ef.pred, "Predictions JSONL {id, output}")->required();
  ef_cmd->add_option("--gold", ef.gold, "Gold instance JSONL")->required();
  ef_cmd->add_option("--format", ef.format, "json or markdown")->capture_default_str();
  ef_cmd->add_option("--output", ef.output, "Write the report here instead of stdout")->default_str("\"\"");
  add(ef_cmd, "--numeric-threshold", ef.numeric_threshold, "Minimum accuracy reward for numeric golds",
      defaults.numeric_threshold);
  add(ef_cmd, "--text-threshold", ef.text_threshold, "Minimum accuracy reward for text golds",
      defaults.text_threshold);
  add(ef_cmd, "--rel-tol", ef.rel_tol, "Numeric relative tolerance", defaults.reward.rel_tol);

  auto* check = app.add_subcommand("check", "Self-checks");
  check->require_subcommand(1);
  GradFlags gf;
  auto* gf_cmd = check->add_subcommand("gradients", "Analytic versus finite-difference gradients");
  gf_cmd->add_option("--objective", gf.objective, "sft_nll, grpo or all")->capture_default_str();
  gf_cmd->add_option("--beta", gf.betas, "KL weights for the grpo objective")->capture_default_str();
  gf_cmd->add_option("--instances", gf.instances, "Random instances per check")->capture_default_str();
  gf_cmd->add_option("--tol", gf.tol, "Relative error tolerance")->default_str(show(gf.tol));
  gf_cmd->add_option("--seed", gf.seed, "Instance seed")->capture_default_str();

  {
    const CLI::App* at = &app;
    for (int i = 1; i < argc && argv[i][0] != '-'; ++i) {
      const auto subs = at->get_subcommands([](const CLI::App*) { return true; });
      if (subs.empty()) break;
      const auto it = std::find_if(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->check_name(argv[i]); });
      if (it == subs.end()) {
        err << "error: unknown subcommand '" << argv[i] << "'\n\n" << at->help();
        return kExitValidation;
      }
      at = *it;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << deepest(&app)->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << deepest(&app)->help();
    return kExitValidation;
  }

  try {
    if (sr_cmd->parsed()) return synth_run(sr, log, out);
    if (ss_cmd->parsed()) return synth_stats(ss, out);
    if (sp_cmd->parsed()) return synth_split(sp, log, out);
    if (tc_cmd->parsed()) return train_cot(tc, log, out);
    if (tr_cmd->parsed()) return train_rft(tr, log, out);
    if (ef_cmd->parsed()) return eval_score(ef, log, out);
    if (gf_cmd->parsed()) return check_gradients(gf, log, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const eval::UnknownId& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const eval::DuplicateId& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const eval::EmptyGold& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitValidation;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace chartkit::cli
