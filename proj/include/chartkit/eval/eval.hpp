#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chartkit/error.hpp"
#include "chartkit/reward/reward.hpp"
#include "chartkit/synth/instance.hpp"

namespace chartkit::eval {

class UnknownId : public Error {
 public:
  using Error::Error;
};

class DuplicateId : public Error {
 public:
  using Error::Error;
};

class EmptyGold : public Error {
 public:
  using Error::Error;
};

struct Prediction {
  std::string id;
  std::string output;
};

struct EvalOptions {
  reward::RewardConfig reward;
  // An item is correct when its accuracy reward reaches the threshold for the
  // gold answer's kind.
  double numeric_threshold = 1.0;
  double text_threshold = 1.0;

  void validate() const;  // thresholds in (0, 1]; throws ConfigError
};

struct Bucket {
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t format_ok = 0;

  double accuracy() const;           // percent; 0 for an empty bucket
  double format_compliance() const;  // percent
  bool operator==(const Bucket&) const = default;
};

struct EvalReport {
  Bucket overall;
  Bucket single;
  Bucket multi;
  Bucket numeric;
  Bucket text;
  std::size_t missing = 0;  // gold items without a prediction, scored as wrong
  double numeric_threshold = 1.0;
  double text_threshold = 1.0;

  bool operator==(const EvalReport&) const = default;
};

// Scores every gold item. Throws EmptyGold, DuplicateId (in either input) and
// UnknownId (prediction without gold).
EvalReport score_all(const std::vector<Prediction>& predictions, const std::vector<synth::ReasoningInstance>& gold,
                     const EvalOptions& options = {});

enum class ReportFormat { Json, Markdown };

ReportFormat parse_report_format(std::string_view s);  // "json" | "markdown"; throws ConfigError
std::string render_report(const EvalReport& report, ReportFormat format);
EvalReport parse_report_json(std::string_view json);  // throws ConfigError

// {"id", "output"} per line. Throws ConfigError.
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace chartkit::eval
