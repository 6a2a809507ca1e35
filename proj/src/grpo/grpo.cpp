#include "chartkit/grpo/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chartkit::grpo {

namespace {

constexpr double kDegenerateStd = 1e-12;

void check_groups(const ToyPolicy& policy, std::span<const RolloutGroup> groups) {
  for (const auto& g : groups) {
    g.validate();
    if (g.query >= policy.num_queries()) throw PreconditionError("rollout group query out of range");
    for (auto r : g.responses) {
      if (r >= policy.vocab_size(g.query)) throw PreconditionError("rollout response index out of range");
    }
  }
}

// grad_z log pi(o) = e_o - pi, accumulated into dz with weight w.
void add_score_function(std::vector<double>& dz, const std::vector<double>& probs, std::size_t o, double w) {
  for (std::size_t k = 0; k < dz.size(); ++k) dz[k] -= w * probs[k];
  dz[o] += w;
}

}  // namespace

void GrpoConfig::validate() const {
  if (group_size < 2) throw ConfigError("grpo.group_size must be >= 2");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("grpo.clip_eps must lie in (0, 1)");
  if (!(kl_beta >= 0.0)) throw ConfigError("grpo.kl_beta must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("grpo.learning_rate must be > 0");
  if (batch_size == 0) throw ConfigError("grpo.batch_size must be >= 1");
  if (inner_updates == 0) throw ConfigError("grpo.inner_updates must be >= 1");
}

void RolloutGroup::validate() const {
  const auto n = responses.size();
  if (old_logprobs.size() != n || rewards.size() != n || advantages.size() != n) {
    throw PreconditionError("rollout group lists have different lengths");
  }
  if (n < 2) throw GroupTooSmall("rollout group needs G >= 2");
}

std::vector<double> compute_advantages(std::span<const double> rewards) {
  const auto n = rewards.size();
  if (n < 2) throw GroupTooSmall("compute_advantages: G must be >= 2");
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  std::vector<double> adv(n, 0.0);
  if (sd < kDegenerateStd) return adv;
  for (std::size_t i = 0; i < n; ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

double clipped_surrogate(double ratio, double advantage, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

GroupSample sample_group(const ToyPolicy& policy, std::size_t query, std::size_t group_size, Rng& rng) {
  if (group_size < 2) throw GroupTooSmall("sample_group: G must be >= 2");
  const auto lp = policy.log_probs(query);
  std::vector<double> cdf(lp.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < lp.size(); ++r) {
    acc += std::exp(lp[r]);
    cdf[r] = acc;
  }
  GroupSample s;
  s.responses.reserve(group_size);
  s.logprobs.reserve(group_size);
  for (std::size_t i = 0; i < group_size; ++i) {
    // Scale by the accumulated mass so rounding in the CDF tail cannot push
    // the draw past the last bucket.
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto r = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    s.responses.push_back(r);
    s.logprobs.push_back(lp[r]);
  }
  return s;
}

double exact_kl(const ToyPolicy& policy, const ToyPolicy& ref, std::size_t query) {
  policy.require_same_support(ref);
  const auto lp = policy.log_probs(query);
  const auto lq = ref.log_probs(query);
  double kl = 0.0;
  for (std::size_t r = 0; r < lp.size(); ++r) {
    const double p = std::exp(lp[r]);
    if (p > 0.0) kl += p * (lp[r] - lq[r]);
  }
  return std::max(kl, 0.0);
}

double kl_estimate(const ToyPolicy& policy, const ToyPolicy& ref, std::size_t query,
                   std::span<const std::size_t> responses) {
  policy.require_same_support(ref);
  if (responses.empty()) return 0.0;
  const auto lp = policy.log_probs(query);
  const auto lq = ref.log_probs(query);
  double sum = 0.0;
  for (auto o : responses) {
    const double log_u = lq[o] - lp[o];
    // expm1(x) - x equals u - ln u - 1 without cancellation near u = 1.
    sum += std::expm1(log_u) - log_u;
  }
  return sum / static_cast<double>(responses.size());
}

double grpo_objective(const ToyPolicy& policy, const ToyPolicy& ref, std::span<const RolloutGroup> groups,
                      const GrpoConfig& cfg) {
  policy.require_same_support(ref);
  check_groups(policy, groups);
  if (groups.empty()) return 0.0;
  double total = 0.0;
  for (const auto& g : groups) {
    const auto lp = policy.log_probs(g.query);
    double surrogate = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double ratio = std::exp(lp[g.responses[i]] - g.old_logprobs[i]);
      surrogate += clipped_surrogate(ratio, g.advantages[i], cfg.clip_eps);
    }
    surrogate /= static_cast<double>(g.size());
    const double kl = cfg.kl_beta > 0.0 ? kl_estimate(policy, ref, g.query, g.responses) : 0.0;
    total += surrogate - cfg.kl_beta * kl;
  }
  return total / static_cast<double>(groups.size());
}

LogitGradient grpo_logit_gradient(const ToyPolicy& policy, const ToyPolicy& ref,
                                  std::span<const RolloutGroup> groups, const GrpoConfig& cfg) {
  policy.require_same_support(ref);
  check_groups(policy, groups);
  auto dz = zero_logit_gradient(policy);
  if (groups.empty()) return dz;
  const double group_weight = 1.0 / static_cast<double>(groups.size());
  for (const auto& g : groups) {
    const auto lp = policy.log_probs(g.query);
    std::vector<double> probs(lp.size());
    std::transform(lp.begin(), lp.end(), probs.begin(), [](double v) { return std::exp(v); });
    const auto lq = ref.log_probs(g.query);
    const double w = group_weight / static_cast<double>(g.size());
    auto& row = dz[g.query];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto o = g.responses[i];
      const double ratio = std::exp(lp[o] - g.old_logprobs[i]);
      const double a = g.advantages[i];
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
      // d(rho A)/dz = rho A (e_o - pi). The clipped branch is a constant
      // unless rho sits inside the clip interval, where both branches agree.
      double coeff = 0.0;
      if (ratio * a <= clipped * a) coeff += ratio * a;
      if (cfg.kl_beta > 0.0) {
        // d(u - ln u - 1)/dz = (1 - u)(e_o - pi)
        const double u = std::exp(lq[o] - lp[o]);
        coeff -= cfg.kl_beta * (1.0 - u);
      }
      if (coeff != 0.0) add_score_function(row, probs, o, w * coeff);
    }
  }
  return dz;
}

PolicyGradient grpo_gradient(const ToyPolicy& policy, const ToyPolicy& ref, std::span<const RolloutGroup> groups,
                             const GrpoConfig& cfg) {
  return policy.chain(grpo_logit_gradient(policy, ref, groups, cfg));
}

double sft_nll_loss(const ToyPolicy& policy, std::span<const SftExample> batch) {
  if (batch.empty()) throw EmptyBatch("sft_nll_loss: empty batch");
  double loss = 0.0;
  for (const auto& ex : batch) {
    if (ex.query >= policy.num_queries() || ex.target >= policy.vocab_size(ex.query)) {
      throw PreconditionError("sft example out of range");
    }
    loss -= policy.log_prob(ex.query, ex.target);
  }
  return loss / static_cast<double>(batch.size());
}

PolicyGradient sft_nll_gradient(const ToyPolicy& policy, std::span<const SftExample> batch) {
  if (batch.empty()) throw EmptyBatch("sft_nll_gradient: empty batch");
  auto dz = zero_logit_gradient(policy);
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const auto p = policy.probs(ex.query);
    // d(-ln pi_t)/dz = pi - e_t
    add_score_function(dz[ex.query], p, ex.target, -w);
  }
  return policy.chain(dz);
}

}  // namespace chartkit::grpo
