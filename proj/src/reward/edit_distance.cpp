#include <algorithm>
#include <numeric>

#include "chartkit/reward/reward.hpp"
#include "chartkit/text.hpp"

namespace chartkit::reward {

std::size_t levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  // Two rows over the shorter string.
  std::vector<std::size_t> prev(shorter.size() + 1);
  std::vector<std::size_t> curr(shorter.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (longer[i - 1] == shorter[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, subst});
    }
    std::swap(prev, curr);
  }
  return prev[shorter.size()];
}

std::string canonicalize_text(std::string_view s, bool case_insensitive) {
  const auto trimmed = text::trim(s);
  return case_insensitive ? text::to_lower_ascii(trimmed) : std::string(trimmed);
}

double string_reward(std::string_view pred, std::string_view gold, bool case_insensitive) {
  const auto a = text::decode_utf8(canonicalize_text(pred, case_insensitive));
  const auto b = text::decode_utf8(canonicalize_text(gold, case_insensitive));
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const double r = 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
  return std::clamp(r, 0.0, 1.0);
}

}  // namespace chartkit::reward
