#include "chartkit/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>
#include <set>

#include "chartkit/text.hpp"

namespace chartkit::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void ToolConfig::propagate_seed() {
  pipeline.seed = seed;
  sft.seed = seed;
  grpo.seed = seed;
}

eval::EvalOptions ToolConfig::eval_options() const {
  eval::EvalOptions o;
  o.reward = reward;
  o.numeric_threshold = numeric_threshold;
  o.text_threshold = text_threshold;
  return o;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

std::string interpolate_env(std::string_view s, const EnvLookup& env) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '$') {
      out.push_back(s[i++]);
      continue;
    }
    if (i + 1 < s.size() && s[i + 1] == '$') {
      out.push_back('$');
      i += 2;
      continue;
    }
    if (i + 1 >= s.size() || s[i + 1] != '{') {
      out.push_back(s[i++]);
      continue;
    }
    const auto close = s.find('}', i + 2);
    if (close == std::string_view::npos) throw ConfigError("unterminated ${...} in: " + std::string(s));
    const auto body = s.substr(i + 2, close - i - 2);
    const auto sep = body.find(":-");
    const std::string name(body.substr(0, sep));
    if (name.empty()) throw ConfigError("empty variable name in: " + std::string(s));
    if (auto v = env(name)) {
      out += *v;
    } else if (sep != std::string_view::npos) {
      out += body.substr(sep + 2);
    } else {
      throw ConfigError("environment variable " + name + " is not set");
    }
    i = close + 1;
  }
  return out;
}

namespace {

// Typed, strict view over one YAML mapping.
class Section {
 public:
  Section(YAML::Node node, std::string path, const EnvLookup& env) : node_(std::move(node)), path_(std::move(path)), env_(env) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_ + " must be a mapping");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_ && node_.IsMap() && at(key) && !at(key).IsNull();
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(has(key) ? at(key) : YAML::Node(), path_.empty() ? key : path_ + "." + key, env_);
  }

  std::string scalar(const std::string& key) {
    const auto n = at(key);
    if (!n.IsScalar()) throw ConfigError(where(key) + " must be a scalar");
    return interpolate_env(n.Scalar(), env_);
  }

  void get(const std::string& key, std::string& out) {
    if (has(key)) out = scalar(key);
  }

  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto v = text::to_lower_ascii(scalar(key));
    if (v == "true" || v == "yes" || v == "on" || v == "1") {
      out = true;
    } else if (v == "false" || v == "no" || v == "off" || v == "0") {
      out = false;
    } else {
      throw ConfigError(where(key) + " must be a boolean, got '" + v + "'");
    }
  }

  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto v = scalar(key);
    double d = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, d);
    if (ec != std::errc{} || p != end) throw ConfigError(where(key) + " must be a number, got '" + v + "'");
    out = d;
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const std::string& key, Int& out) {
    if (!has(key)) return;
    const auto v = scalar(key);
    Int x{};
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc{} || p != end) throw ConfigError(where(key) + " must be a non-negative integer, got '" + v + "'");
    out = x;
  }

  void get(const std::string& key, fs::path& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = resolve(s, base);
  }

  std::vector<std::string> list(const std::string& key) {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const auto n = at(key);
    if (!n.IsSequence()) throw ConfigError(where(key) + " must be a list");
    for (const auto& e : n) {
      if (!e.IsScalar()) throw ConfigError(where(key) + " entries must be scalars");
      out.push_back(interpolate_env(e.Scalar(), env_));
    }
    return out;
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    if (node_ && node_.IsMap()) {
      for (const auto& kv : node_) out.push_back(kv.first.as<std::string>());
    }
    return out;
  }

  // Throws on keys that were never asked for.
  void finish() const {
    for (const auto& k : keys()) {
      if (!seen_.contains(k)) throw ConfigError("unknown config key: " + where(k));
    }
  }

  static fs::path resolve(const std::string& s, const fs::path& base) {
    fs::path p(s);
    return p.is_absolute() || base.empty() ? p : (base / p).lexically_normal();
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  // Const access never inserts into the mapping.
  YAML::Node at(const std::string& key) const {
    const YAML::Node& n = node_;
    return n[key];
  }

  YAML::Node node_;
  std::string path_;
  const EnvLookup& env_;
  std::set<std::string> seen_;
};

void parse_into(ToolConfig& cfg, const YAML::Node& root, const fs::path& base, const EnvLookup& env) {
  Section top(root, "", env);
  top.get("seed", cfg.seed);

  {
    auto s = top.child("llm");
    s.get("base_url", cfg.llm.base_url);
    s.get("api_key", cfg.llm.api_key);
    s.get("model", cfg.llm.model);
    s.get("temperature", cfg.llm.temperature);
    s.get("timeout_ms", cfg.llm.timeout_ms);
    s.get("max_attempts", cfg.llm.max_attempts);
    s.get("backoff_initial_ms", cfg.llm.backoff_initial_ms);
    s.get("backoff_factor", cfg.llm.backoff_factor);
    s.get("mock", cfg.llm_mock);
    fs::path fixtures;
    s.get("fixtures", fixtures, base);
    if (!fixtures.empty()) cfg.llm_fixtures = fixtures;
    s.finish();
  }
  {
    auto s = top.child("executor");
    s.get("command", cfg.executor_command);
    s.get("mock", cfg.executor_mock);
    s.get("grace_ms", cfg.executor_grace_ms);
    s.finish();
  }
  {
    auto s = top.child("pipeline");
    auto& p = cfg.pipeline;
    s.get("tables", p.tables_dir, base);
    s.get("seeds", p.seeds_dir, base);
    s.get("chart_types", p.chart_types, base);
    s.get("output", p.output_dir, base);
    if (s.has("arities")) {
      p.arities.clear();
      for (const auto& a : s.list("arities")) p.arities.push_back(synth::parse_arity(a));
    }
    auto quotas = s.child("quotas");
    for (const auto& tag : quotas.keys()) {
      std::size_t n = 0;
      quotas.get(tag, n);
      p.quotas[tag] = n;
    }
    s.get("pairs_per_table", p.pairs_per_table);
    s.get("timeout_ms", p.timeout_ms);
    s.get("workers", p.workers);
    s.get("sft_fraction", p.sft_fraction);
    s.finish();
  }
  {
    auto s = top.child("reward");
    s.get("rel_tol", cfg.reward.rel_tol);
    s.get("w_acc", cfg.reward.w_acc);
    s.get("w_fmt", cfg.reward.w_fmt);
    s.get("case_insensitive", cfg.reward.case_insensitive);
    s.get("enforce_order", cfg.reward.grammar.enforce_order);
    s.get("allow_outside_content", cfg.reward.grammar.allow_outside_content);
    s.finish();
  }
  {
    auto s = top.child("sft");
    s.get("learning_rate", cfg.sft.learning_rate);
    s.get("epochs", cfg.sft.epochs);
    s.get("batch_size", cfg.sft.batch_size);
    s.get("max_steps", cfg.sft.max_steps);
    s.finish();
  }
  {
    auto s = top.child("grpo");
    auto& g = cfg.grpo;
    s.get("group_size", g.group_size);
    s.get("clip_eps", g.clip_eps);
    s.get("kl_beta", g.kl_beta);
    s.get("learning_rate", g.learning_rate);
    s.get("epochs", g.epochs);
    s.get("batch_size", g.batch_size);
    s.get("max_steps", g.max_steps);
    s.get("inner_updates", g.inner_updates);
    s.finish();
  }
  {
    auto s = top.child("eval");
    s.get("numeric_threshold", cfg.numeric_threshold);
    s.get("text_threshold", cfg.text_threshold);
    s.finish();
  }
  top.finish();
}

}  // namespace

ToolConfig default_config(const EnvLookup& env) {
  ToolConfig cfg;
  if (auto v = env("CHARTKIT_LLM_BASE_URL")) cfg.llm.base_url = *v;
  if (auto v = env("CHARTKIT_LLM_API_KEY")) cfg.llm.api_key = *v;
  if (auto v = env("CHARTKIT_LLM_MODEL"); v && !v->empty()) cfg.llm.model = *v;
  cfg.propagate_seed();
  return cfg;
}

ToolConfig parse_config(std::string_view yaml, const fs::path& base_dir, const EnvLookup& env) {
  auto cfg = default_config(env);
  try {
    const auto root = YAML::Load(std::string(yaml));
    if (root && !root.IsNull()) parse_into(cfg, root, base_dir, env);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML config: ") + e.what());
  }
  cfg.propagate_seed();
  return cfg;
}

ToolConfig load_config(const fs::path& path, const EnvLookup& env) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file does not exist: " + path.string());
  return parse_config(text::read_file(path.string()), path.parent_path(), env);
}

std::string mask_secret(std::string_view secret) { return secret.empty() ? "" : "***"; }

ordered_json to_json(const ToolConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["llm"] = {{"mock", c.llm_mock},
              {"fixtures", c.llm_fixtures ? c.llm_fixtures->generic_string() : ""},
              {"base_url", c.llm.base_url},
              {"api_key", mask_secret(c.llm.api_key)},
              {"model", c.llm.model},
              {"temperature", c.llm.temperature},
              {"timeout_ms", c.llm.timeout_ms},
              {"max_attempts", c.llm.max_attempts},
              {"backoff_initial_ms", c.llm.backoff_initial_ms},
              {"backoff_factor", c.llm.backoff_factor}};
  j["executor"] = {{"mock", c.executor_mock}, {"command", c.executor_command}, {"grace_ms", c.executor_grace_ms}};
  auto p = c.pipeline.snapshot();
  p.erase("seed");
  j["pipeline"] = p;
  j["reward"] = {{"rel_tol", c.reward.rel_tol},
                 {"w_acc", c.reward.w_acc},
                 {"w_fmt", c.reward.w_fmt},
                 {"case_insensitive", c.reward.case_insensitive},
                 {"enforce_order", c.reward.grammar.enforce_order},
                 {"allow_outside_content", c.reward.grammar.allow_outside_content}};
  j["sft"] = {{"learning_rate", c.sft.learning_rate},
              {"epochs", c.sft.epochs},
              {"batch_size", c.sft.batch_size},
              {"max_steps", c.sft.max_steps}};
  j["grpo"] = {{"group_size", c.grpo.group_size},       {"clip_eps", c.grpo.clip_eps},
               {"kl_beta", c.grpo.kl_beta},             {"learning_rate", c.grpo.learning_rate},
               {"epochs", c.grpo.epochs},               {"batch_size", c.grpo.batch_size},
               {"max_steps", c.grpo.max_steps},         {"inner_updates", c.grpo.inner_updates}};
  j["eval"] = {{"numeric_threshold", c.numeric_threshold}, {"text_threshold", c.text_threshold}};
  return j;
}

}  // namespace chartkit::cli
