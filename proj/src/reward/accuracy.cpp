#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "chartkit/error.hpp"
#include "chartkit/reward/reward.hpp"
#include "chartkit/text.hpp"

namespace chartkit::reward {

namespace {

constexpr double kZeroGoldTolerance = 1e-9;

// UTF-8 encodings of the accepted leading currency symbols.
constexpr std::array<std::string_view, 6> kCurrencySymbols = {"$", "€", "£", "¥", "₹", "₩"};

bool strip_currency(std::string_view& s) {
  for (auto sym : kCurrencySymbols) {
    if (s.starts_with(sym)) {
      s.remove_prefix(sym.size());
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<double> parse_number(std::string_view input) {
  std::string_view s = text::trim(input);
  if (s.ends_with('%')) s = text::trim(s.substr(0, s.size() - 1));

  // Sign may sit on either side of the currency symbol: "-$5" and "$-5".
  bool negative = false;
  bool signed_ = false;
  auto take_sign = [&] {
    if (!signed_ && !s.empty() && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      signed_ = true;
      s.remove_prefix(1);
    }
  };
  take_sign();
  if (strip_currency(s)) take_sign();

  std::string digits;
  digits.reserve(s.size());
  for (char c : s) {
    if (c != ',') digits.push_back(c);
  }
  if (digits.empty()) return std::nullopt;
  // from_chars accepts "inf"/"nan" spellings; only plain literals count.
  const char lead = digits.front();
  if (!(lead == '.' || (lead >= '0' && lead <= '9'))) return std::nullopt;

  double value = 0.0;
  const char* begin = digits.data();
  const char* end = begin + digits.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return negative ? -value : value;
}

double numeric_reward(std::string_view pred, double gold_value, double rel_tol) {
  if (!(rel_tol > 0.0)) throw PreconditionError("numeric_reward: rel_tol must be positive");
  const auto p = parse_number(pred);
  if (!p) return 0.0;
  if (gold_value == 0.0) return std::abs(*p) <= kZeroGoldTolerance ? 1.0 : 0.0;
  return std::abs(*p - gold_value) <= rel_tol * std::abs(gold_value) ? 1.0 : 0.0;
}

GoldAnswer GoldAnswer::classify(std::string raw) {
  GoldAnswer g;
  if (auto v = parse_number(raw)) {
    g.kind = Kind::Numeric;
    g.value = *v;
  }
  g.raw = std::move(raw);
  return g;
}

std::string_view to_string(GoldAnswer::Kind k) { return k == GoldAnswer::Kind::Numeric ? "numeric" : "text"; }

void RewardConfig::validate() const {
  if (!(rel_tol > 0.0)) throw ConfigError("reward.rel_tol must be > 0");
  if (w_acc < 0.0 || w_fmt < 0.0) throw ConfigError("reward weights must be >= 0");
  if (!(w_acc + w_fmt > 0.0)) throw ConfigError("at least one reward weight must be positive");
}

double accuracy_reward(std::string_view response, const GoldAnswer& gold, const RewardConfig& cfg) {
  const auto parsed = parse_response(response, cfg.grammar);
  if (!parsed) return 0.0;
  if (gold.is_numeric()) return numeric_reward(parsed.response->answer, gold.value, cfg.rel_tol);
  return string_reward(parsed.response->answer, gold.raw, cfg.case_insensitive);
}

RewardBreakdown total_reward(std::string_view response, const GoldAnswer& gold, const RewardConfig& cfg) {
  RewardBreakdown b;
  const auto parsed = parse_response(response, cfg.grammar);
  b.parse_ok = static_cast<bool>(parsed);
  b.format = b.parse_ok ? 1.0 : 0.0;
  if (b.parse_ok) {
    const auto& answer = parsed.response->answer;
    b.accuracy = gold.is_numeric() ? numeric_reward(answer, gold.value, cfg.rel_tol)
                                   : string_reward(answer, gold.raw, cfg.case_insensitive);
  }
  b.total = cfg.w_acc * b.accuracy + cfg.w_fmt * b.format;
  return b;
}

}  // namespace chartkit::reward
