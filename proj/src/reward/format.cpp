#include <algorithm>

#include "chartkit/reward/reward.hpp"
#include "chartkit/text.hpp"

namespace chartkit::reward {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

struct Block {
  std::size_t begin;  // offset of the opening tag
  std::size_t end;    // one past the closing tag
  std::string_view body;
};

bool has_pair(std::string_view text, std::string_view open, std::string_view close) {
  const auto o = text.find(open);
  return o != std::string_view::npos && text.find(close, o + open.size()) != std::string_view::npos;
}

Block locate(std::string_view text, std::string_view open, std::string_view close) {
  const auto o = text.find(open);
  const auto c = text.find(close, o + open.size());
  return {o, c + close.size(), text.substr(o + open.size(), c - o - open.size())};
}

ParseResult fail(FormatError e) { return {std::nullopt, e}; }

}  // namespace

std::string_view to_string(FormatError e) {
  switch (e) {
    case FormatError::MissingThink: return "MissingThink";
    case FormatError::MissingAnswer: return "MissingAnswer";
    case FormatError::DuplicateTag: return "DuplicateTag";
    case FormatError::ExtraContent: return "ExtraContent";
    case FormatError::EmptySpan: return "EmptySpan";
  }
  return "Unknown";
}

ParseResult parse_response(std::string_view text, const GrammarOptions& grammar) {
  if (!has_pair(text, kThinkOpen, kThinkClose)) return fail(FormatError::MissingThink);
  if (!has_pair(text, kAnswerOpen, kAnswerClose)) return fail(FormatError::MissingAnswer);

  for (auto tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
    if (text::count_occurrences(text, tag) > 1) return fail(FormatError::DuplicateTag);
  }

  const Block think = locate(text, kThinkOpen, kThinkClose);
  const Block answer = locate(text, kAnswerOpen, kAnswerClose);

  const bool overlap = think.begin < answer.end && answer.begin < think.end;
  if (overlap) return fail(FormatError::ExtraContent);
  if (grammar.enforce_order && answer.begin < think.begin) return fail(FormatError::ExtraContent);

  if (!grammar.allow_outside_content) {
    const Block& first = think.begin < answer.begin ? think : answer;
    const Block& second = think.begin < answer.begin ? answer : think;
    const bool clean = text::is_blank(text.substr(0, first.begin)) &&
                       text::is_blank(text.substr(first.end, second.begin - first.end)) &&
                       text::is_blank(text.substr(second.end));
    if (!clean) return fail(FormatError::ExtraContent);
  }

  if (text::is_blank(think.body) || text::is_blank(answer.body)) return fail(FormatError::EmptySpan);

  return {ParsedResponse{std::string(think.body), std::string(answer.body)}, FormatError::MissingThink};
}

std::string serialize_response(std::string_view think, std::string_view answer) {
  std::string out;
  out.reserve(think.size() + answer.size() + 32);
  out.append(kThinkOpen).append(think).append(kThinkClose);
  out.append(kAnswerOpen).append(answer).append(kAnswerClose);
  return out;
}

double format_reward(std::string_view text, const GrammarOptions& grammar) {
  return parse_response(text, grammar) ? 1.0 : 0.0;
}

}  // namespace chartkit::reward
