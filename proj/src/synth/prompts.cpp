#include "chartkit/synth/prompts.hpp"

#include "chartkit/error.hpp"

namespace chartkit::synth {

std::string compose_code_prompt(const TableSource& table, const SeedCode& seed, Arity arity) {
  if (seed.arity != arity) {
    throw PreconditionError("compose_code_prompt: seed '" + seed.id + "' is " + std::string(to_string(seed.arity)) +
                            "-chart but " + std::string(to_string(arity)) + " was requested");
  }
  std::string p;
  p += "You write Matplotlib plotting code for chart reasoning data.\n";
  p += "Visualize the data table below as a " + seed.chart_type + " chart.\n";
  if (arity == Arity::Multi) {
    p += std::string(kSubplotInstruction) + "\n";
  }
  p += "Use every value in the table. Save the figure to the path in the OUTPUT_PATH variable.\n";
  p += "Reply with a single fenced Python code block.\n\n";
  p += "### CHART TYPE\n" + seed.chart_type + "\n\n";
  p += "### ARITY\n" + std::string(to_string(arity)) + "\n\n";
  p += "### TABLE\n";
  p += "caption: " + table.caption + "\n";
  p += "source: " + table.origin + "\n";
  p += render_table(table);
  p += "\n### EXAMPLE CODE\n```python\n" + seed.code;
  if (!seed.code.empty() && seed.code.back() != '\n') p += '\n';
  p += "```\n";
  return p;
}

std::string compose_instance_prompt(std::string_view code, std::string_view chart_type, Arity arity) {
  std::string p;
  p += "Below is executable plotting code for a ";
  p += chart_type;
  p += arity == Arity::Multi ? " figure with several sub-charts.\n" : " chart.\n";
  p += "Write one complex question about the rendered chart, a step-by-step reasoning path that answers it, "
       "and the final answer.\n";
  if (arity == Arity::Multi) {
    p += std::string(kCrossReferenceInstruction) + "\n";
  } else {
    p += "The question must need several reasoning steps over the chart's values.\n";
  }
  p += "The final answer must be a single number or a short phrase.\n";
  p += "Reply in exactly this layout:\nQUESTION: <question>\nTHINK: <reasoning>\nANSWER: <answer>\n\n";
  p += "### ARITY\n" + std::string(to_string(arity)) + "\n\n";
  p += "### CODE\n```python\n";
  p += code;
  if (!code.empty() && code.back() != '\n') p += '\n';
  p += "```\n";
  return p;
}

}  // namespace chartkit::synth
