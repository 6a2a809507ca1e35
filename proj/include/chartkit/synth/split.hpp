#pragma once

#include <cstdint>
#include <vector>

#include "chartkit/synth/instance.hpp"

namespace chartkit::synth {

inline constexpr double kDefaultSftFraction = 228.0 / 258.0;

struct SplitResult {
  std::vector<ReasoningInstance> sft;
  std::vector<ReasoningInstance> rl;
};

// Uniform random partition with |sft| = round(sft_fraction * N). Both halves
// keep the input order and carry their split tag. Throws PreconditionError
// unless 0 < sft_fraction < 1.
SplitResult split_dataset(std::vector<ReasoningInstance> instances, double sft_fraction, std::uint64_t seed);

}  // namespace chartkit::synth
