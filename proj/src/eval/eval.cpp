#include "chartkit/eval/eval.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "chartkit/text.hpp"
#include "json.hpp"

namespace chartkit::eval {

using nlohmann::json;

void EvalOptions::validate() const {
  reward.validate();
  if (!(numeric_threshold > 0.0 && numeric_threshold <= 1.0)) throw ConfigError("numeric threshold must lie in (0, 1]");
  if (!(text_threshold > 0.0 && text_threshold <= 1.0)) throw ConfigError("text threshold must lie in (0, 1]");
}

double Bucket::accuracy() const { return n == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(n); }

double Bucket::format_compliance() const {
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(format_ok) / static_cast<double>(n);
}

EvalReport score_all(const std::vector<Prediction>& predictions, const std::vector<synth::ReasoningInstance>& gold,
                     const EvalOptions& options) {
  options.validate();
  if (gold.empty()) throw EmptyGold("gold set is empty");
  std::unordered_set<std::string> gold_ids;
  for (const auto& g : gold) {
    if (!gold_ids.insert(g.id).second) throw DuplicateId("duplicate gold id: " + g.id);
  }
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    if (!gold_ids.contains(p.id)) throw UnknownId("prediction id has no gold instance: " + p.id);
    if (!by_id.emplace(p.id, &p).second) throw DuplicateId("duplicate prediction id: " + p.id);
  }

  EvalReport r;
  r.numeric_threshold = options.numeric_threshold;
  r.text_threshold = options.text_threshold;
  for (const auto& g : gold) {
    bool correct = false;
    bool format_ok = false;
    if (const auto it = by_id.find(g.id); it != by_id.end()) {
      const auto& out = it->second->output;
      format_ok = reward::format_reward(out, options.reward.grammar) == 1.0;
      const double acc = reward::accuracy_reward(out, g.answer, options.reward);
      correct = acc >= (g.answer.is_numeric() ? options.numeric_threshold : options.text_threshold);
    } else {
      ++r.missing;
    }
    auto& by_arity = g.arity == synth::Arity::Single ? r.single : r.multi;
    auto& by_kind = g.answer.is_numeric() ? r.numeric : r.text;
    for (Bucket* b : {&r.overall, &by_arity, &by_kind}) {
      ++b->n;
      b->correct += correct ? 1 : 0;
      b->format_ok += format_ok ? 1 : 0;
    }
  }
  return r;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format: " + std::string(s));
}

namespace {

json bucket_json(const Bucket& b) {
  return {{"n", b.n},
          {"correct", b.correct},
          {"accuracy", b.accuracy()},
          {"format_ok", b.format_ok},
          {"format_compliance", b.format_compliance()}};
}

Bucket bucket_from(const json& j) {
  Bucket b;
  b.n = j.at("n").get<std::size_t>();
  b.correct = j.at("correct").get<std::size_t>();
  b.format_ok = j.at("format_ok").get<std::size_t>();
  if (b.correct > b.n || b.format_ok > b.n) throw ConfigError("bucket counts exceed bucket size");
  return b;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string render_json(const EvalReport& r) {
  json j;
  j["overall"] = bucket_json(r.overall);
  j["buckets"] = {{"single", bucket_json(r.single)},
                  {"multi", bucket_json(r.multi)},
                  {"numeric", bucket_json(r.numeric)},
                  {"text", bucket_json(r.text)}};
  j["missing"] = r.missing;
  j["thresholds"] = {{"numeric", r.numeric_threshold}, {"text", r.text_threshold}};
  return j.dump(2) + "\n";
}

std::string render_markdown(const EvalReport& r) {
  const std::array<std::pair<const char*, const Bucket*>, 5> rows = {{{"overall", &r.overall},
                                                                      {"single", &r.single},
                                                                      {"multi", &r.multi},
                                                                      {"numeric", &r.numeric},
                                                                      {"text", &r.text}}};
  std::string out = "| bucket | N | accuracy |\n|---|---:|---:|\n";
  std::string omitted;
  for (const auto& [name, b] : rows) {
    if (b->n == 0) {
      omitted += omitted.empty() ? name : std::string(", ") + name;
      continue;
    }
    out += std::string("| ") + name + " | " + std::to_string(b->n) + " | " + pct(b->accuracy()) + " |\n";
  }
  out += "\nFormat compliance: " + pct(r.overall.format_compliance()) + "% (" + std::to_string(r.overall.format_ok) +
         "/" + std::to_string(r.overall.n) + ")\n";
  if (r.missing > 0) out += "Missing predictions: " + std::to_string(r.missing) + " (scored as wrong)\n";
  if (!omitted.empty()) out += "\n* Buckets with no items are omitted: " + omitted + "\n";
  return out;
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
  return format == ReportFormat::Json ? render_json(report) : render_markdown(report);
}

EvalReport parse_report_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    EvalReport r;
    r.overall = bucket_from(j.at("overall"));
    const auto& b = j.at("buckets");
    r.single = bucket_from(b.at("single"));
    r.multi = bucket_from(b.at("multi"));
    r.numeric = bucket_from(b.at("numeric"));
    r.text = bucket_from(b.at("text"));
    r.missing = j.at("missing").get<std::size_t>();
    r.numeric_threshold = j.at("thresholds").at("numeric").get<double>();
    r.text_threshold = j.at("thresholds").at("text").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read predictions: " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::is_blank(line)) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("output").get<std::string>()});
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed prediction: " + e.what());
    }
  }
  return out;
}

}  // namespace chartkit::eval
