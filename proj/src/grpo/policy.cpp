#include "chartkit/grpo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chartkit::grpo {

void Vocabulary::validate() const {
  if (query_ids.size() != candidates.size()) {
    throw PreconditionError("vocabulary: query id count does not match candidate lists");
  }
  if (feature_names.size() != feature_dim && !feature_names.empty()) {
    throw PreconditionError("vocabulary: feature_names must be empty or have feature_dim entries");
  }
  for (std::size_t q = 0; q < candidates.size(); ++q) {
    if (candidates[q].size() < 2) {
      throw PreconditionError("vocabulary: query '" + query_ids[q] + "' needs at least 2 candidates");
    }
    for (const auto& c : candidates[q]) {
      if (c.features.size() != feature_dim) {
        throw PreconditionError("vocabulary: feature vector width mismatch in query '" + query_ids[q] + "'");
      }
    }
  }
}

std::size_t Vocabulary::find_query(const std::string& id) const {
  const auto it = std::find(query_ids.begin(), query_ids.end(), id);
  if (it == query_ids.end()) throw PreconditionError("unknown query id: " + id);
  return static_cast<std::size_t>(it - query_ids.begin());
}

std::vector<double> PolicyGradient::flatten() const {
  std::vector<double> out;
  for (const auto& row : bias) out.insert(out.end(), row.begin(), row.end());
  out.insert(out.end(), shared.begin(), shared.end());
  return out;
}

double PolicyGradient::max_abs() const {
  double m = 0.0;
  for (double v : flatten()) m = std::max(m, std::abs(v));
  return m;
}

ToyPolicy::ToyPolicy(std::shared_ptr<const Vocabulary> vocab) : vocab_(std::move(vocab)) {
  if (!vocab_) throw PreconditionError("ToyPolicy: null vocabulary");
  vocab_->validate();
  bias_.resize(vocab_->candidates.size());
  for (std::size_t q = 0; q < bias_.size(); ++q) bias_[q].assign(vocab_->candidates[q].size(), 0.0);
  shared_.assign(vocab_->feature_dim, 0.0);
}

std::vector<double> ToyPolicy::logits(std::size_t q) const {
  std::vector<double> z(bias_[q]);
  const auto& cands = vocab_->candidates[q];
  for (std::size_t r = 0; r < z.size(); ++r) {
    for (std::size_t k = 0; k < shared_.size(); ++k) z[r] += shared_[k] * cands[r].features[k];
  }
  return z;
}

std::vector<double> ToyPolicy::log_probs(std::size_t q) const {
  auto z = logits(q);
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  for (double& v : z) v -= lse;
  return z;
}

std::vector<double> ToyPolicy::probs(std::size_t q) const {
  auto lp = log_probs(q);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

double ToyPolicy::log_prob(std::size_t q, std::size_t r) const { return log_probs(q).at(r); }

std::size_t ToyPolicy::num_parameters() const {
  std::size_t n = shared_.size();
  for (const auto& row : bias_) n += row.size();
  return n;
}

std::vector<double> ToyPolicy::parameters() const {
  std::vector<double> theta;
  theta.reserve(num_parameters());
  for (const auto& row : bias_) theta.insert(theta.end(), row.begin(), row.end());
  theta.insert(theta.end(), shared_.begin(), shared_.end());
  return theta;
}

void ToyPolicy::set_parameters(std::span<const double> theta) {
  if (theta.size() != num_parameters()) throw PreconditionError("set_parameters: wrong parameter count");
  std::size_t i = 0;
  for (auto& row : bias_) {
    for (double& v : row) v = theta[i++];
  }
  for (double& v : shared_) v = theta[i++];
}

PolicyGradient ToyPolicy::chain(const LogitGradient& dz) const {
  PolicyGradient g;
  g.bias = dz;
  g.shared.assign(shared_.size(), 0.0);
  for (std::size_t q = 0; q < dz.size(); ++q) {
    const auto& cands = vocab_->candidates[q];
    for (std::size_t r = 0; r < dz[q].size(); ++r) {
      for (std::size_t k = 0; k < g.shared.size(); ++k) g.shared[k] += dz[q][r] * cands[r].features[k];
    }
  }
  return g;
}

void ToyPolicy::apply(const PolicyGradient& g, double step) {
  for (std::size_t q = 0; q < bias_.size(); ++q) {
    for (std::size_t r = 0; r < bias_[q].size(); ++r) bias_[q][r] += step * g.bias[q][r];
  }
  for (std::size_t k = 0; k < shared_.size(); ++k) shared_[k] += step * g.shared[k];
}

bool ToyPolicy::same_support(const ToyPolicy& other) const {
  if (vocab_ == other.vocab_) return true;
  const auto& a = vocab_->candidates;
  const auto& b = other.vocab_->candidates;
  if (a.size() != b.size()) return false;
  for (std::size_t q = 0; q < a.size(); ++q) {
    if (a[q].size() != b[q].size()) return false;
    for (std::size_t r = 0; r < a[q].size(); ++r) {
      if (a[q][r].text != b[q][r].text) return false;
    }
  }
  return true;
}

void ToyPolicy::require_same_support(const ToyPolicy& other) const {
  if (!same_support(other)) throw VocabMismatch("policies range over different candidate sets");
}

LogitGradient zero_logit_gradient(const ToyPolicy& policy) {
  LogitGradient dz(policy.num_queries());
  for (std::size_t q = 0; q < dz.size(); ++q) dz[q].assign(policy.vocab_size(q), 0.0);
  return dz;
}

}  // namespace chartkit::grpo
