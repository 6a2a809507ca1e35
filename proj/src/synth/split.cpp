#include "chartkit/synth/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chartkit/rng.hpp"

namespace chartkit::synth {

SplitResult split_dataset(std::vector<ReasoningInstance> instances, double sft_fraction, std::uint64_t seed) {
  if (!(sft_fraction > 0.0 && sft_fraction < 1.0)) {
    throw PreconditionError("sft_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = instances.size();
  const auto n_sft = static_cast<std::size_t>(std::llround(sft_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<bool> to_sft(n, false);
  for (std::size_t k = 0; k < n_sft; ++k) to_sft[order[k]] = true;

  SplitResult out;
  out.sft.reserve(n_sft);
  out.rl.reserve(n - n_sft);
  for (std::size_t i = 0; i < n; ++i) {
    auto& inst = instances[i];
    inst.split = to_sft[i] ? Split::Sft : Split::Rl;
    (to_sft[i] ? out.sft : out.rl).push_back(std::move(inst));
  }
  return out;
}

}  // namespace chartkit::synth
