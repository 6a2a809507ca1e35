#include "chartkit/grpo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace chartkit::grpo {

namespace {

std::shared_ptr<const Vocabulary> random_vocabulary(const GradCheckOptions& opt, Rng& rng) {
  auto v = std::make_shared<Vocabulary>();
  v->feature_dim = opt.feature_dim;
  for (std::size_t q = 0; q < opt.queries; ++q) {
    v->query_ids.push_back("q" + std::to_string(q));
    std::vector<Candidate> cands;
    for (std::size_t r = 0; r < opt.vocab; ++r) {
      Candidate c;
      c.text = "response " + std::to_string(q) + "." + std::to_string(r);
      for (std::size_t k = 0; k < opt.feature_dim; ++k) c.features.push_back(rng.normal());
      c.tokens = 2;
      cands.push_back(std::move(c));
    }
    v->candidates.push_back(std::move(cands));
  }
  return v;
}

void randomize(ToyPolicy& p, Rng& rng, double scale) {
  auto theta = p.parameters();
  for (double& t : theta) t = scale * rng.normal();
  p.set_parameters(theta);
}

void perturb(ToyPolicy& p, Rng& rng, double scale) {
  auto theta = p.parameters();
  for (double& t : theta) t += scale * rng.normal();
  p.set_parameters(theta);
}

bool near_clip_boundary(const GrpoInstance& inst, double eps, double margin) {
  for (const auto& g : inst.groups) {
    const auto lp = inst.policy.log_probs(g.query);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double ratio = std::exp(lp[g.responses[i]] - g.old_logprobs[i]);
      if (std::abs(ratio - (1.0 - eps)) < margin || std::abs(ratio - (1.0 + eps)) < margin) return true;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(ObjectiveKind k) { return k == ObjectiveKind::SftNll ? "sft_nll" : "grpo"; }

ObjectiveKind parse_objective_kind(std::string_view s) {
  if (s == "sft_nll") return ObjectiveKind::SftNll;
  if (s == "grpo") return ObjectiveKind::Grpo;
  throw ConfigError("unknown objective kind: " + std::string(s));
}

std::vector<double> finite_difference_gradient(const ToyPolicy& policy,
                                               const std::function<double(const ToyPolicy&)>& f, double step) {
  ToyPolicy probe = policy;
  auto theta = policy.parameters();
  std::vector<double> grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + step;
    probe.set_parameters(theta);
    const double up = f(probe);
    theta[k] = saved - step;
    probe.set_parameters(theta);
    const double down = f(probe);
    theta[k] = saved;
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric, double floor) {
  if (analytic.size() != numeric.size()) throw PreconditionError("gradient size mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric[k]), floor});
    worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / denom);
  }
  return worst;
}

GrpoInstance random_grpo_instance(const GradCheckOptions& opt, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto vocab = random_vocabulary(opt, rng);
    GrpoInstance inst{ToyPolicy(vocab), ToyPolicy(vocab), ToyPolicy(vocab), {}};
    randomize(inst.old, rng, 1.0);
    inst.policy = inst.old;
    perturb(inst.policy, rng, 0.15);
    randomize(inst.ref, rng, 1.0);
    for (std::size_t q = 0; q < opt.queries; ++q) {
      for (std::size_t k = 0; k < opt.groups_per_query; ++k) {
        auto s = sample_group(inst.old, q, opt.group_size, rng);
        RolloutGroup g;
        g.query = q;
        g.responses = std::move(s.responses);
        g.old_logprobs = std::move(s.logprobs);
        for (std::size_t i = 0; i < opt.group_size; ++i) g.rewards.push_back(rng.uniform());
        g.advantages = compute_advantages(g.rewards);
        inst.groups.push_back(std::move(g));
      }
    }
    if (!near_clip_boundary(inst, opt.clip_eps, opt.clip_margin)) return inst;
  }
  throw Error("random_grpo_instance: could not draw an instance away from the clip boundary");
}

GradCheckReport gradient_check(ObjectiveKind kind, const GradCheckOptions& opt) {
  GradCheckReport report;
  report.kind = kind;
  report.tol = opt.tol;
  report.instances = opt.instances;
  Rng rng(opt.seed);
  GrpoConfig cfg;
  cfg.group_size = opt.group_size;
  cfg.clip_eps = opt.clip_eps;
  cfg.kl_beta = opt.kl_beta;

  for (std::size_t n = 0; n < opt.instances; ++n) {
    std::vector<double> analytic;
    std::vector<double> numeric;
    if (kind == ObjectiveKind::SftNll) {
      auto vocab = random_vocabulary(opt, rng);
      ToyPolicy policy(vocab);
      randomize(policy, rng, 1.0);
      std::vector<SftExample> batch;
      for (std::size_t q = 0; q < opt.queries; ++q) batch.push_back({q, rng.below(opt.vocab)});
      analytic = sft_nll_gradient(policy, batch).flatten();
      numeric = finite_difference_gradient(
          policy, [&](const ToyPolicy& p) { return sft_nll_loss(p, batch); }, opt.fd_step);
    } else {
      const auto inst = random_grpo_instance(opt, rng);
      analytic = grpo_gradient(inst.policy, inst.ref, inst.groups, cfg).flatten();
      numeric = finite_difference_gradient(
          inst.policy, [&](const ToyPolicy& p) { return grpo_objective(p, inst.ref, inst.groups, cfg); },
          opt.fd_step);
    }
    const double err = max_relative_error(analytic, numeric);
    report.per_instance.push_back(err);
    report.max_rel_error = std::max(report.max_rel_error, err);
  }
  report.passed = report.max_rel_error < opt.tol;
  return report;
}

}  // namespace chartkit::grpo
