#pragma once

// Rule-based rewards for tagged reasoning outputs.
//
// A well-formed output is exactly
//
//     ws* <think> T </think> ws* <answer> A </answer> ws*
//
// with T and A non-blank. The format reward is 1 on well-formed outputs and
// 0 otherwise. The accuracy reward is gated on format and dispatches on the
// gold answer's kind: numeric golds use a binary relative-tolerance match,
// text golds use the normalized edit-distance similarity.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartkit::reward {

enum class FormatError {
  MissingThink,
  MissingAnswer,
  DuplicateTag,
  ExtraContent,
  EmptySpan,
};

std::string_view to_string(FormatError e);

struct ParsedResponse {
  std::string think;
  std::string answer;

  bool operator==(const ParsedResponse&) const = default;
};

// Grammar relaxations. Both default to the strict reading.
struct GrammarOptions {
  bool enforce_order = true;           // think block must precede answer block
  bool allow_outside_content = false;  // non-whitespace text outside the blocks
};

struct ParseResult {
  std::optional<ParsedResponse> response;
  FormatError error = FormatError::MissingThink;  // meaningful iff !response

  explicit operator bool() const { return response.has_value(); }
};

// Rules are checked in this order and the first violation is reported:
//   1. a <think> ... </think> pair exists            (MissingThink)
//   2. an <answer> ... </answer> pair exists         (MissingAnswer)
//   3. each of the four tags occurs exactly once     (DuplicateTag)
//   4. blocks do not overlap or nest, appear in order,
//      and nothing but whitespace surrounds them      (ExtraContent)
//   5. both spans are non-blank                       (EmptySpan)
// Spans are returned verbatim, without trimming.
ParseResult parse_response(std::string_view text, const GrammarOptions& grammar = {});

std::string serialize_response(std::string_view think, std::string_view answer);

double format_reward(std::string_view text, const GrammarOptions& grammar = {});

// Numeric canonicalization: trims whitespace, drops commas, one leading
// currency symbol and one trailing '%', then parses a decimal or scientific
// literal. Returns nullopt for anything else, including inf/nan.
std::optional<double> parse_number(std::string_view text);

double numeric_reward(std::string_view pred, double gold_value, double rel_tol);

// Unit-cost Levenshtein distance over code points.
std::size_t levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b);

std::string canonicalize_text(std::string_view s, bool case_insensitive);

// 1 - lev / max_len over canonicalized strings, in [0, 1]. Two strings that
// are both empty after canonicalization score 1.
double string_reward(std::string_view pred, std::string_view gold, bool case_insensitive = true);

struct GoldAnswer {
  enum class Kind { Numeric, Text };

  std::string raw;
  Kind kind = Kind::Text;
  double value = 0.0;  // meaningful iff kind == Numeric

  static GoldAnswer classify(std::string raw);
  bool is_numeric() const { return kind == Kind::Numeric; }
};

std::string_view to_string(GoldAnswer::Kind k);

struct RewardConfig {
  double rel_tol = 0.05;
  double w_acc = 1.0;
  double w_fmt = 1.0;
  bool case_insensitive = true;
  GrammarOptions grammar{};

  // Throws ConfigError on rel_tol <= 0, negative weights or all-zero weights.
  void validate() const;
  double max_total() const { return w_acc + w_fmt; }
};

struct RewardBreakdown {
  double format = 0.0;
  double accuracy = 0.0;
  double total = 0.0;
  bool parse_ok = false;

  bool operator==(const RewardBreakdown&) const = default;
};

double accuracy_reward(std::string_view response, const GoldAnswer& gold, const RewardConfig& cfg = {});
RewardBreakdown total_reward(std::string_view response, const GoldAnswer& gold, const RewardConfig& cfg = {});

}  // namespace chartkit::reward
