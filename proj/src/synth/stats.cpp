#include "chartkit/synth/stats.hpp"

#include <cstdio>

#include "chartkit/text.hpp"

namespace chartkit::synth {

namespace {

struct Sums {
  std::size_t count = 0;
  double question = 0.0;
  double think = 0.0;
  double answer = 0.0;
};

LengthRow mean_of(const Sums& s) {
  LengthRow r;
  r.count = s.count;
  if (s.count == 0) return r;
  const auto n = static_cast<double>(s.count);
  r.question = s.question / n;
  r.think = s.think / n;
  r.answer = s.answer / n;
  return r;
}

constexpr std::array kSplits = {StatsSplit::Sft, StatsSplit::Rl, StatsSplit::All};
constexpr std::array kArities = {StatsArity::Single, StatsArity::Multi, StatsArity::Total};

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::size_t whitespace_tokens(std::string_view s) { return text::count_whitespace_tokens(s); }

std::string_view to_string(StatsSplit s) {
  switch (s) {
    case StatsSplit::Sft: return "sft";
    case StatsSplit::Rl: return "rl";
    case StatsSplit::All: return "all";
  }
  return "all";
}

std::string_view to_string(StatsArity a) {
  switch (a) {
    case StatsArity::Single: return "single";
    case StatsArity::Multi: return "multi";
    case StatsArity::Total: return "total";
  }
  return "total";
}

StatsTable compute_stats(const std::vector<ReasoningInstance>& instances, const Tokenizer& tokenizer) {
  std::array<std::array<Sums, 3>, 3> sums{};
  for (const auto& inst : instances) {
    const double q = static_cast<double>(tokenizer(inst.question));
    const double t = static_cast<double>(tokenizer(inst.think));
    const double a = static_cast<double>(tokenizer(inst.answer.raw));
    const std::size_t arity = inst.arity == Arity::Single ? 0 : 1;
    std::vector<std::size_t> splits = {2};
    if (inst.split == Split::Sft) splits.push_back(0);
    if (inst.split == Split::Rl) splits.push_back(1);
    for (auto s : splits) {
      for (auto col : {arity, std::size_t{2}}) {
        auto& cell = sums[s][col];
        ++cell.count;
        cell.question += q;
        cell.think += t;
        cell.answer += a;
      }
    }
  }
  StatsTable table;
  table.empty = instances.empty();
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 3; ++a) table.rows[s][a] = mean_of(sums[s][a]);
  }
  return table;
}

nlohmann::ordered_json stats_to_json(const StatsTable& table) {
  nlohmann::ordered_json j;
  j["empty"] = table.empty;
  for (auto s : kSplits) {
    auto& col = j[std::string(to_string(s))];
    for (auto a : kArities) {
      const auto& r = table.at(s, a);
      col[std::string(to_string(a))] = {
          {"count", r.count}, {"question", r.question}, {"think", r.think}, {"answer", r.answer}};
    }
  }
  return j;
}

std::string render_stats_markdown(const StatsTable& table) {
  std::string out = "| split | arity | N | question | think | answer |\n|---|---|---:|---:|---:|---:|\n";
  for (auto s : kSplits) {
    for (auto a : kArities) {
      const auto& r = table.at(s, a);
      out += "| " + std::string(to_string(s)) + " | " + std::string(to_string(a)) + " | " + std::to_string(r.count) +
             " | " + fixed2(r.question) + " | " + fixed2(r.think) + " | " + fixed2(r.answer) + " |\n";
    }
  }
  if (table.empty) out += "\n(empty: no instances)\n";
  return out;
}

}  // namespace chartkit::synth
