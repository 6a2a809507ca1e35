#pragma once

#include <string>
#include <string_view>

#include "chartkit/synth/sources.hpp"

namespace chartkit::synth {

inline constexpr std::string_view kSubplotInstruction =
    "Build a composite figure with several sub-plots in one image, using functions like plt.subplots().";
inline constexpr std::string_view kCrossReferenceInstruction =
    "The question must require information to be cross-referenced between sub-charts.";

// Code-generation prompt: the table, the seed as an in-context example and,
// for multi-chart arity, the sub-plot instruction. Throws PreconditionError
// when the seed's arity differs from the requested one.
std::string compose_code_prompt(const TableSource& table, const SeedCode& seed, Arity arity);

// Instance-generation prompt for executable plotting code. The completion is
// expected in labelled QUESTION / THINK / ANSWER sections.
std::string compose_instance_prompt(std::string_view code, std::string_view chart_type, Arity arity);

}  // namespace chartkit::synth
