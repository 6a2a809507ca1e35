#include "chartkit/synth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>

#include "chartkit/rng.hpp"
#include "chartkit/synth/instance.hpp"
#include "chartkit/synth/png.hpp"
#include "chartkit/synth/prompts.hpp"
#include "chartkit/text.hpp"

namespace chartkit::synth {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (tables_dir.empty()) throw ConfigError("pipeline.tables is not set");
  if (seeds_dir.empty()) throw ConfigError("pipeline.seeds is not set");
  if (chart_types.empty()) throw ConfigError("pipeline.chart_types is not set");
  if (output_dir.empty()) throw ConfigError("pipeline.output is not set");
  if (!fs::is_directory(tables_dir)) throw ConfigError("table directory does not exist: " + tables_dir.string());
  if (!fs::is_directory(seeds_dir)) throw ConfigError("seed directory does not exist: " + seeds_dir.string());
  if (!fs::is_regular_file(chart_types)) throw ConfigError("chart type file does not exist: " + chart_types.string());
  if (fs::exists(output_dir) && !fs::is_directory(output_dir)) {
    throw ConfigError("output path exists and is not a directory: " + output_dir.string());
  }
  if (arities.empty()) throw ConfigError("pipeline.arities is empty");
  if (timeout_ms <= 0) throw ConfigError("pipeline.timeout_ms must be positive");
  if (workers == 0) throw ConfigError("pipeline.workers must be at least 1");
  if (!(sft_fraction > 0.0 && sft_fraction < 1.0)) throw ConfigError("pipeline.sft_fraction must lie in (0, 1)");
}

ordered_json PipelineConfig::snapshot() const {
  ordered_json j;
  j["tables"] = tables_dir.generic_string();
  j["seeds"] = seeds_dir.generic_string();
  j["chart_types"] = chart_types.generic_string();
  j["output"] = output_dir.generic_string();
  auto& a = j["arities"] = ordered_json::array();
  for (auto ar : arities) a.push_back(to_string(ar));
  auto& q = j["quotas"] = ordered_json::object();
  for (const auto& [tag, n] : quotas) q[tag] = n;
  j["pairs_per_table"] = pairs_per_table;
  j["timeout_ms"] = timeout_ms;
  j["workers"] = workers;
  j["seed"] = seed;
  j["sft_fraction"] = sft_fraction;
  for (const auto& [k, v] : annotations.items()) j[k] = v;
  return j;
}

ordered_json DatasetManifest::to_json() const {
  ordered_json j;
  j["run_id"] = run_id;
  j["seed"] = seed;
  j["counts"] = {{"generated", counts.generated},
                 {"execution_failed", counts.execution_failed},
                 {"format_rejected", counts.format_rejected},
                 {"accepted", counts.accepted}};
  auto& r = j["rejections"] = ordered_json::object();
  for (const auto& [reason, n] : rejections) r[reason] = n;
  j["split"] = {{"sft", sft_size}, {"rl", rl_size}};
  j["stats"] = stats_to_json(stats);
  j["config"] = config;
  return j;
}

namespace {

struct WorkItem {
  const TableSource* table;
  const SeedCode* seed;
  std::string id;
};

enum class Outcome { Accepted, ExecutionFailed, FormatRejected };

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Accepted: return "accepted";
    case Outcome::ExecutionFailed: return "execution_failed";
    case Outcome::FormatRejected: return "format_rejected";
  }
  return "accepted";
}

struct ItemResult {
  Outcome outcome = Outcome::ExecutionFailed;
  std::string reason;
  std::string detail;
  std::string code_prompt;
  std::string code_completion;
  std::string instance_prompt;
  std::string instance_completion;
  std::optional<ReasoningInstance> instance;
};

std::vector<WorkItem> plan(const PipelineConfig& cfg, const std::vector<TableSource>& tables,
                           const std::vector<SeedCode>& seeds) {
  std::vector<const SeedCode*> eligible;
  for (const auto& s : seeds) {
    if (std::find(cfg.arities.begin(), cfg.arities.end(), s.arity) != cfg.arities.end()) eligible.push_back(&s);
  }
  if (eligible.empty()) throw ConfigError("no seed matches the configured arities");

  std::map<std::string, std::size_t> used;
  std::vector<WorkItem> items;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    std::vector<std::size_t> pick(eligible.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    if (cfg.pairs_per_table > 0 && cfg.pairs_per_table < pick.size()) {
      auto rng = Rng::stream(cfg.seed, 0x7461626c65ULL, t);
      for (std::size_t i = 0; i < cfg.pairs_per_table; ++i) std::swap(pick[i], pick[i + rng.below(pick.size() - i)]);
      pick.resize(cfg.pairs_per_table);
      std::sort(pick.begin(), pick.end());
    }
    for (auto i : pick) {
      const auto* seed = eligible[i];
      if (auto q = cfg.quotas.find(seed->chart_type); q != cfg.quotas.end() && used[seed->chart_type] >= q->second) {
        continue;
      }
      ++used[seed->chart_type];
      items.push_back({&tables[t], seed, tables[t].id + "__" + seed->id});
    }
  }
  return items;
}

ItemResult process(const WorkItem& item, LlmClient& client, Executor& executor, const PipelineConfig& cfg,
                   const fs::path& image_dir) {
  ItemResult r;
  r.code_prompt = compose_code_prompt(*item.table, *item.seed, item.seed->arity);

  CodeCandidate cand;
  try {
    r.code_completion = client.complete(r.code_prompt);
    cand = candidate_from_completion(r.code_prompt, r.code_completion);
  } catch (const LlmError& e) {
    r.reason = "llm_error";
    r.detail = e.what();
    return r;
  } catch (const NoCodeBlock& e) {
    r.reason = "no_code_block";
    r.detail = e.what();
    return r;
  }
  cand.id = item.id;
  cand.chart_type = item.seed->chart_type;
  cand.arity = item.seed->arity;
  cand.table_id = item.table->id;
  cand.seed_id = item.seed->id;

  execute_candidates(executor, std::span(&cand, 1), std::chrono::milliseconds(cfg.timeout_ms), image_dir);
  if (cand.status != CandidateStatus::Rendered) {
    r.reason = cand.timed_out ? "execution_timeout" : "execution_error";
    r.detail = cand.failure;
    return r;
  }

  r.outcome = Outcome::FormatRejected;
  RawInstance raw = instance_request(cand);
  r.instance_prompt = raw.prompt;
  try {
    raw.completion = client.complete(raw.prompt);
    r.instance_completion = raw.completion;
    fill_instance_fields(raw);
    auto inst = validate_instance(raw);
    inst.image = "images/" + item.id + ".png";
    r.instance = std::move(inst);
    r.outcome = Outcome::Accepted;
  } catch (const LlmError& e) {
    r.reason = "llm_error";
    r.detail = e.what();
  } catch (const MalformedCompletion& e) {
    r.reason = "malformed_completion";
    r.detail = e.what();
  } catch (const ValidationError& e) {
    r.reason = std::string(to_string(e.kind()));
    r.detail = e.what();
  }
  return r;
}

// Every seed has to render before anything else runs.
void check_seeds(const std::vector<SeedCode>& seeds, Executor& executor, const PipelineConfig& cfg,
                 const fs::path& scratch) {
  std::vector<std::string> failed;
  for (const auto& s : seeds) {
    CodeCandidate c;
    c.id = "seed__" + s.id;
    c.code = s.code;
    execute_candidates(executor, std::span(&c, 1), std::chrono::milliseconds(cfg.timeout_ms), scratch);
    if (c.status != CandidateStatus::Rendered) failed.push_back(s.id + " (" + c.failure + ")");
  }
  if (!failed.empty()) {
    std::string msg = "seed code failed to execute:";
    for (const auto& f : failed) msg += " " + f;
    throw ConfigError(msg);
  }
}

std::string transcript_line(const WorkItem& item, const ItemResult& r) {
  ordered_json j;
  j["id"] = item.id;
  j["table_id"] = item.table->id;
  j["seed_id"] = item.seed->id;
  j["chart_type"] = item.seed->chart_type;
  j["arity"] = to_string(item.seed->arity);
  j["outcome"] = to_string(r.outcome);
  j["reason"] = r.reason;
  j["detail"] = r.detail;
  j["code_prompt"] = r.code_prompt;
  j["code_completion"] = r.code_completion;
  j["instance_prompt"] = r.instance_prompt;
  j["instance_completion"] = r.instance_completion;
  return j.dump();
}

}  // namespace

DatasetManifest run_pipeline(const PipelineConfig& cfg, LlmClient& client, const ExecutorFactory& executors) {
  cfg.validate();
  const auto types = ChartTypes::load(cfg.chart_types);
  for (const auto& [tag, n] : cfg.quotas) {
    if (!types.contains(tag)) throw ConfigError("quota for unknown chart type: " + tag);
  }
  const auto tables = load_tables(cfg.tables_dir);
  if (tables.empty()) throw ConfigError("table directory has no .csv or .tsv files: " + cfg.tables_dir.string());
  const auto seeds = load_seeds(cfg.seeds_dir, types);
  if (seeds.empty()) throw ConfigError("seed directory has no .py files: " + cfg.seeds_dir.string());
  const auto items = plan(cfg, tables, seeds);

  const bool created_output = !fs::exists(cfg.output_dir);
  fs::create_directories(cfg.output_dir);
  const auto out = fs::absolute(cfg.output_dir);
  const auto scratch = out / ".seed_check";
  {
    auto executor = executors();
    try {
      check_seeds(seeds, *executor, cfg, scratch);
    } catch (...) {
      std::error_code ec;
      if (created_output) {
        fs::remove_all(out, ec);
      } else {
        fs::remove_all(scratch, ec);
      }
      throw;
    }
    fs::remove_all(scratch);
  }

  const auto image_dir = out / "images";
  fs::remove_all(image_dir);
  fs::create_directories(image_dir);

  std::vector<ItemResult> results(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  const auto worker = [&] {
    try {
      auto executor = executors();
      for (;;) {
        if (abort) return;
        const auto i = next.fetch_add(1);
        if (i >= items.size()) return;
        results[i] = process(items[i], client, *executor, cfg, image_dir);
      }
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!first_error) first_error = std::current_exception();
      abort = true;
    }
  };
  const auto n_workers = std::min(cfg.workers, std::max<std::size_t>(items.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  DatasetManifest m;
  m.seed = cfg.seed;
  m.config = cfg.snapshot();
  m.run_id = text::hex64(text::fnv1a64(m.config.dump()));
  m.counts.generated = items.size();

  std::vector<ReasoningInstance> accepted;
  std::string transcripts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& r = results[i];
    transcripts += transcript_line(items[i], r) + "\n";
    switch (r.outcome) {
      case Outcome::Accepted:
        ++m.counts.accepted;
        accepted.push_back(std::move(*r.instance));
        continue;
      case Outcome::ExecutionFailed: ++m.counts.execution_failed; break;
      case Outcome::FormatRejected: ++m.counts.format_rejected; break;
    }
    ++m.rejections[std::string(to_string(r.outcome)) + "." + r.reason];
    std::error_code ec;
    fs::remove(image_dir / (items[i].id + ".png"), ec);
  }

  auto split = split_dataset(accepted, cfg.sft_fraction, cfg.seed);
  m.sft_size = split.sft.size();
  m.rl_size = split.rl.size();
  std::unordered_map<std::string, Split> assigned;
  for (const auto& s : split.sft) assigned.emplace(s.id, Split::Sft);
  for (const auto& s : split.rl) assigned.emplace(s.id, Split::Rl);
  for (auto& inst : accepted) inst.split = assigned.at(inst.id);
  m.stats = compute_stats(accepted);

  write_instances(out / "instances.jsonl", accepted);
  text::write_file((out / "transcripts.jsonl").string(), transcripts);
  text::write_file((out / "manifest.json").string(), m.to_json().dump(2) + "\n");
  return m;
}

}  // namespace chartkit::synth
