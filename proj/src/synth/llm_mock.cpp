#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "chartkit/reward/reward.hpp"
#include "chartkit/synth/llm.hpp"
#include "chartkit/synth/sources.hpp"
#include "chartkit/text.hpp"
#include "json.hpp"

namespace chartkit::synth {

namespace fs = std::filesystem;

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", std::round(v * 1e4) / 1e4);
  return buf;
}

// Text of the section that follows a "### NAME" header, up to the next header.
std::string section(const std::string& prompt, std::string_view name) {
  const std::string header = "### " + std::string(name) + "\n";
  const auto start = prompt.find(header);
  if (start == std::string::npos) return {};
  const auto body = start + header.size();
  const auto end = prompt.find("\n### ", body);
  return prompt.substr(body, end == std::string::npos ? std::string::npos : end - body);
}

struct Series {
  std::string name;
  std::vector<double> values;
};

struct ChartData {
  std::vector<std::string> labels;
  std::vector<Series> series;
};

ChartData table_from_prompt(const std::string& table_section, std::string& caption) {
  ChartData data;
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : text::split_lines(table_section)) {
    if (line.starts_with("caption: ")) caption = line.substr(9);
    if (!line.starts_with("|") || line.starts_with("|-")) continue;
    std::vector<std::string> cells;
    std::size_t pos = 1;
    while (pos < line.size()) {
      auto bar = line.find('|', pos);
      if (bar == std::string::npos) break;
      cells.emplace_back(text::trim(std::string_view(line).substr(pos, bar - pos)));
      pos = bar + 1;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) return data;
  for (std::size_t r = 1; r < rows.size(); ++r) data.labels.push_back(rows[r].at(0));
  for (std::size_t c = 1; c < rows[0].size(); ++c) {
    Series s{rows[0][c], {}};
    bool numeric = true;
    for (std::size_t r = 1; r < rows.size() && numeric; ++r) {
      const auto v = c < rows[r].size() ? reward::parse_number(rows[r][c]) : std::nullopt;
      if (v) {
        s.values.push_back(*v);
      } else {
        numeric = false;
      }
    }
    if (numeric) data.series.push_back(std::move(s));
  }
  return data;
}

std::string plot_call(std::string_view chart_type) {
  if (chart_type.find("line") != std::string_view::npos || chart_type.find("area") != std::string_view::npos) {
    return "ax.plot(range(len(labels)), values, marker=\"o\", label=name)";
  }
  if (chart_type.find("scatter") != std::string_view::npos || chart_type.find("bubble") != std::string_view::npos) {
    return "ax.scatter(range(len(labels)), values, label=name)";
  }
  return "ax.bar(range(len(labels)), values, label=name)";
}

std::string code_completion(const std::string& prompt) {
  std::string caption;
  const auto chart_type = std::string(text::trim(section(prompt, "CHART TYPE")));
  const bool multi = text::trim(section(prompt, "ARITY")) == "multi";
  const auto data = table_from_prompt(section(prompt, "TABLE"), caption);
  if (data.series.empty()) {
    return "The table has no numeric column, so there is nothing to plot.";
  }
  std::string code;
  code += "# chart type: " + chart_type + "\n";
  code += "import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n";
  code += "labels = " + json(data.labels).dump() + "\n";
  code += "series = {}\n";
  for (const auto& s : data.series) {
    code += "series[" + json(s.name).dump() + "] = [";
    for (std::size_t i = 0; i < s.values.size(); ++i) code += (i ? ", " : "") + fmt(s.values[i]);
    code += "]\n";
  }
  code += "\n";
  const auto call = plot_call(chart_type);
  if (multi) {
    code += "fig, axes = plt.subplots(1, len(series), figsize=(4 * len(series), 4), squeeze=False)\n";
    code += "for ax, (name, values) in zip(axes[0], series.items()):\n";
    code += "    " + call + "\n";
    code += "    ax.set_title(name)\n";
    code += "    ax.set_xticks(range(len(labels)))\n";
    code += "    ax.set_xticklabels(labels, rotation=45)\n";
    code += "fig.suptitle(" + json(caption).dump() + ")\n";
  } else {
    code += "fig, ax = plt.subplots(figsize=(6, 4))\n";
    code += "for name, values in series.items():\n";
    code += "    " + call + "\n";
    code += "ax.set_xticks(range(len(labels)))\n";
    code += "ax.set_xticklabels(labels, rotation=45)\n";
    code += "ax.set_title(" + json(caption).dump() + ")\n";
    code += "ax.legend()\n";
  }
  code += "fig.tight_layout()\nfig.savefig(OUTPUT_PATH)\n";
  return "Here is the plotting code.\n\n```python\n" + code + "```\n";
}

ChartData data_from_code(const std::string& code) {
  ChartData data;
  for (const auto& line : text::split_lines(code)) {
    try {
      if (line.starts_with("labels = ")) {
        data.labels = json::parse(line.substr(9)).get<std::vector<std::string>>();
      } else if (line.starts_with("series[")) {
        const auto close = line.find("] = ");
        if (close == std::string::npos) continue;
        Series s;
        s.name = json::parse(line.substr(7, close - 7)).get<std::string>();
        s.values = json::parse(line.substr(close + 4)).get<std::vector<double>>();
        data.series.push_back(std::move(s));
      }
    } catch (const json::exception&) {
      // Not one of our data literals.
    }
  }
  return data;
}

std::string listing(const ChartData& d, const Series& s) {
  std::string out;
  for (std::size_t i = 0; i < s.values.size() && i < d.labels.size(); ++i) {
    out += (i ? ", " : "") + d.labels[i] + " = " + fmt(s.values[i]);
  }
  return out;
}

double total(const Series& s) { return std::accumulate(s.values.begin(), s.values.end(), 0.0); }

std::string sum_expression(const Series& s) {
  std::string out;
  for (std::size_t i = 0; i < s.values.size(); ++i) out += (i ? " + " : "") + fmt(s.values[i]);
  return out;
}

std::string instance_completion(const std::string& prompt) {
  const bool multi = text::trim(section(prompt, "ARITY")) == "multi";
  const auto data = data_from_code(section(prompt, "CODE"));
  if (data.series.empty() || data.labels.empty()) {
    return "QUESTION: What does the chart show?\nTHINK: The code carries no readable data.\n";
  }
  const auto variant = text::fnv1a64(prompt) % 3;
  std::string q, t, a;
  if (multi && data.series.size() >= 2) {
    const auto& s0 = data.series[0];
    const auto& s1 = data.series[1];
    if (variant == 2) {
      std::size_t best = 0;
      double gap = -1.0;
      for (std::size_t i = 0; i < s0.values.size() && i < s1.values.size(); ++i) {
        const double g = std::abs(s0.values[i] - s1.values[i]);
        if (g > gap) {
          gap = g;
          best = i;
        }
      }
      q = "Comparing the " + s0.name + " sub-chart with the " + s1.name +
          " sub-chart, in which category is the absolute gap between the two largest?";
      t = "Step 1: In the " + s0.name + " sub-chart, " + listing(data, s0) + ". Step 2: In the " + s1.name +
          " sub-chart, " + listing(data, s1) + ". Step 3: The largest absolute gap is " + fmt(gap) + " at " +
          data.labels[best] + ".";
      a = data.labels[best];
    } else {
      const double d = total(s0) - total(s1);
      q = "What is the total of " + s0.name + " in its sub-chart minus the total of " + s1.name +
          " in the other sub-chart?";
      t = "Step 1: In the " + s0.name + " sub-chart, " + listing(data, s0) + ", so the total is " +
          sum_expression(s0) + " = " + fmt(total(s0)) + ". Step 2: In the " + s1.name + " sub-chart, " +
          listing(data, s1) + ", so the total is " + fmt(total(s1)) + ". Step 3: " + fmt(total(s0)) + " - " +
          fmt(total(s1)) + " = " + fmt(d) + ".";
      a = fmt(d);
    }
  } else {
    const auto& s = data.series[variant % data.series.size()];
    if (variant == 1) {
      const auto it = std::max_element(s.values.begin(), s.values.end());
      const auto idx = static_cast<std::size_t>(it - s.values.begin());
      q = "Which category has the highest " + s.name + " value?";
      t = "Step 1: Read the " + s.name + " values: " + listing(data, s) + ". Step 2: The highest value is " +
          fmt(*it) + ", which belongs to " + data.labels.at(idx) + ".";
      a = data.labels.at(idx);
    } else if (variant == 2) {
      const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
      q = "What is the difference between the largest and smallest " + s.name + " values?";
      t = "Step 1: Read the " + s.name + " values: " + listing(data, s) + ". Step 2: The largest is " + fmt(*hi) +
          " and the smallest is " + fmt(*lo) + ". Step 3: " + fmt(*hi) + " - " + fmt(*lo) + " = " +
          fmt(*hi - *lo) + ".";
      a = fmt(*hi - *lo);
    } else {
      q = "What is the total of " + s.name + " across all " + std::to_string(s.values.size()) + " categories?";
      t = "Step 1: Read the " + s.name + " values: " + listing(data, s) + ". Step 2: Add them: " +
          sum_expression(s) + " = " + fmt(total(s)) + ".";
      a = fmt(total(s));
    }
  }
  return "QUESTION: " + q + "\nTHINK: " + t + "\nANSWER: " + a + "\n";
}

}  // namespace

std::string scripted_completion(const std::string& prompt) {
  if (prompt.find("### TABLE\n") != std::string::npos) return code_completion(prompt);
  if (prompt.find("### CODE\n") != std::string::npos) return instance_completion(prompt);
  return "I cannot help with that request.";
}

MockLlmClient::MockLlmClient(std::optional<fs::path> fixtures, bool scripted_fallback)
    : fixtures_(std::move(fixtures)), fallback_(scripted_fallback) {
  if (fixtures_ && !fs::is_directory(*fixtures_)) {
    throw ConfigError("mock fixture directory does not exist: " + fixtures_->string());
  }
}

std::string MockLlmClient::complete(const std::string& prompt) {
  const auto hash = prompt_hash(prompt);
  if (fixtures_) {
    const auto file = *fixtures_ / (hash + ".txt");
    if (fs::is_regular_file(file)) return text::read_file(file.string());
  }
  if (!fallback_) throw LlmError("no mock completion for prompt " + hash);
  return scripted_completion(prompt);
}

}  // namespace chartkit::synth
