#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "chartkit/synth/instance.hpp"
#include "json.hpp"

namespace chartkit::synth {

using Tokenizer = std::function<std::size_t(std::string_view)>;

std::size_t whitespace_tokens(std::string_view s);

struct LengthRow {
  std::size_t count = 0;
  double question = 0.0;  // mean tokens per instance
  double think = 0.0;
  double answer = 0.0;
};

enum class StatsSplit { Sft, Rl, All };
enum class StatsArity { Single, Multi, Total };

std::string_view to_string(StatsSplit s);  // "sft" | "rl" | "all"
std::string_view to_string(StatsArity a);  // "single" | "multi" | "total"

struct StatsTable {
  std::array<std::array<LengthRow, 3>, 3> rows{};  // [split][arity]
  bool empty = true;

  const LengthRow& at(StatsSplit s, StatsArity a) const {
    return rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
  }
};

// Mean token lengths grouped by split and arity. Unassigned instances only
// enter the "all" column.
StatsTable compute_stats(const std::vector<ReasoningInstance>& instances, const Tokenizer& tokenizer = whitespace_tokens);

nlohmann::ordered_json stats_to_json(const StatsTable& table);
std::string render_stats_markdown(const StatsTable& table);

}  // namespace chartkit::synth
