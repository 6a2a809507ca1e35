#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chartkit/grpo/grpo.hpp"

namespace chartkit::grpo {

enum class ObjectiveKind { SftNll, Grpo };

std::string_view to_string(ObjectiveKind k);
ObjectiveKind parse_objective_kind(std::string_view s);  // "sft_nll" | "grpo"

// Central differences of f over the policy's flat parameter vector.
std::vector<double> finite_difference_gradient(const ToyPolicy& policy,
                                               const std::function<double(const ToyPolicy&)>& f, double step);

// max_k |a_k - n_k| / max(|a_k|, |n_k|, floor)
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                          double floor = 1e-6);

struct GradCheckOptions {
  std::size_t instances = 20;
  std::size_t queries = 3;
  std::size_t vocab = 4;
  std::size_t group_size = 4;
  std::size_t groups_per_query = 1;
  std::size_t feature_dim = 2;
  double clip_eps = 0.2;
  double kl_beta = 0.04;
  double fd_step = 1e-5;
  // Instances whose ratios land within this distance of 1 +/- eps are redrawn:
  // the objective has a kink there and central differences straddle it.
  double clip_margin = 1e-3;
  double tol = 1e-5;
  std::uint64_t seed = 7;
};

struct GradCheckReport {
  ObjectiveKind kind = ObjectiveKind::SftNll;
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  double tol = 0.0;
  bool passed = false;
  std::vector<double> per_instance;
};

// A random small GRPO problem: policy, old snapshot, reference and groups
// sampled from the snapshot with random rewards.
struct GrpoInstance {
  ToyPolicy policy;
  ToyPolicy old;
  ToyPolicy ref;
  std::vector<RolloutGroup> groups;
};

GrpoInstance random_grpo_instance(const GradCheckOptions& opt, Rng& rng);

GradCheckReport gradient_check(ObjectiveKind kind, const GradCheckOptions& opt);

}  // namespace chartkit::grpo
