#pragma once

// Group-relative policy optimization and the supervised NLL loss on the toy
// policy.
//
// For a group of G responses o_i sampled from the snapshot policy,
//
//   J = mean_groups[ (1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i)
//                    - beta * KLhat(pi || pi_ref) ]
//
// with rho_i = pi(o_i) / pi_old(o_i), A_i the group-standardized reward and
// KLhat the mean over the group of u - ln u - 1, u = pi_ref(o_i) / pi(o_i).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chartkit/grpo/policy.hpp"

namespace chartkit::grpo {

class GroupTooSmall : public Error {
 public:
  using Error::Error;
};

class EmptyBatch : public Error {
 public:
  using Error::Error;
};

struct GrpoConfig {
  std::size_t group_size = 8;
  double clip_eps = 0.2;
  double kl_beta = 0.04;
  double learning_rate = 1e-6;
  std::size_t epochs = 3;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  // Optimization steps; 0 derives epochs * ceil(num_queries / batch_size).
  std::size_t max_steps = 0;
  // Gradient steps taken on each sampled batch before re-snapshotting.
  std::size_t inner_updates = 1;

  void validate() const;  // throws ConfigError
};

struct RolloutGroup {
  std::size_t query = 0;
  std::vector<std::size_t> responses;
  std::vector<double> old_logprobs;
  std::vector<double> rewards;
  std::vector<double> advantages;

  std::size_t size() const { return responses.size(); }
  void validate() const;  // throws PreconditionError on ragged lists
};

struct SftExample {
  std::size_t query = 0;
  std::size_t target = 0;
};

// A_i = (r_i - mean) / std with the population standard deviation; a group
// whose std is below 1e-12 gets all-zero advantages.
std::vector<double> compute_advantages(std::span<const double> rewards);

// One term of the clipped surrogate.
double clipped_surrogate(double ratio, double advantage, double clip_eps);

struct GroupSample {
  std::vector<std::size_t> responses;
  std::vector<double> logprobs;
};

GroupSample sample_group(const ToyPolicy& policy, std::size_t query, std::size_t group_size, Rng& rng);

double exact_kl(const ToyPolicy& policy, const ToyPolicy& ref, std::size_t query);
double kl_estimate(const ToyPolicy& policy, const ToyPolicy& ref, std::size_t query,
                   std::span<const std::size_t> responses);

double grpo_objective(const ToyPolicy& policy, const ToyPolicy& ref, std::span<const RolloutGroup> groups,
                      const GrpoConfig& cfg);

// Analytic gradient of grpo_objective. Where the clipped branch of the min is
// active and rho lies outside [1-eps, 1+eps] the term contributes nothing.
LogitGradient grpo_logit_gradient(const ToyPolicy& policy, const ToyPolicy& ref,
                                  std::span<const RolloutGroup> groups, const GrpoConfig& cfg);
PolicyGradient grpo_gradient(const ToyPolicy& policy, const ToyPolicy& ref, std::span<const RolloutGroup> groups,
                             const GrpoConfig& cfg);

double sft_nll_loss(const ToyPolicy& policy, std::span<const SftExample> batch);
PolicyGradient sft_nll_gradient(const ToyPolicy& policy, std::span<const SftExample> batch);

}  // namespace chartkit::grpo
