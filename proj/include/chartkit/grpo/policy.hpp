#pragma once

// Categorical toy policy over whole responses.
//
// Each query owns a finite list of candidate responses. The logit for
// candidate r of query q is
//
//     z[q][r] = bias[q][r] + dot(shared, features[q][r])
//
// The bias table gives every query independent parameters; the shared weight
// vector couples queries through per-candidate style features, so training on
// one set of queries moves the distribution on another. With feature_dim == 0
// the policy is a plain logit table.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chartkit/error.hpp"
#include "chartkit/rng.hpp"

namespace chartkit::grpo {

class VocabMismatch : public Error {
 public:
  using Error::Error;
};

struct Candidate {
  std::string text;
  std::vector<double> features;  // length == Vocabulary::feature_dim
  std::size_t tokens = 0;        // whitespace token count of text
};

struct Vocabulary {
  std::vector<std::string> query_ids;
  std::vector<std::vector<Candidate>> candidates;  // [query][response]
  std::size_t feature_dim = 0;
  std::vector<std::string> feature_names;

  // Throws PreconditionError unless every query has >= 2 candidates and all
  // feature vectors have feature_dim entries.
  void validate() const;
  std::size_t find_query(const std::string& id) const;  // throws on miss
};

// Gradient with respect to effective logits, laid out like z[q][r].
using LogitGradient = std::vector<std::vector<double>>;

struct PolicyGradient {
  std::vector<std::vector<double>> bias;
  std::vector<double> shared;

  std::vector<double> flatten() const;
  double max_abs() const;
};

class ToyPolicy {
 public:
  explicit ToyPolicy(std::shared_ptr<const Vocabulary> vocab);

  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& vocab_ptr() const { return vocab_; }
  std::size_t num_queries() const { return vocab_->query_ids.size(); }
  std::size_t vocab_size(std::size_t q) const { return vocab_->candidates[q].size(); }
  const Candidate& candidate(std::size_t q, std::size_t r) const { return vocab_->candidates[q][r]; }

  std::span<double> bias(std::size_t q) { return bias_[q]; }
  std::span<const double> bias(std::size_t q) const { return bias_[q]; }
  std::span<double> shared() { return shared_; }
  std::span<const double> shared() const { return shared_; }

  std::vector<double> logits(std::size_t q) const;
  std::vector<double> log_probs(std::size_t q) const;
  std::vector<double> probs(std::size_t q) const;
  double log_prob(std::size_t q, std::size_t r) const;

  // Flat parameter vector: bias rows in query order, then shared weights.
  std::size_t num_parameters() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> theta);

  // Pulls a logit-space gradient back onto the parameters.
  PolicyGradient chain(const LogitGradient& dz) const;

  // theta += step * g
  void apply(const PolicyGradient& g, double step);

  // True when both policies range over the same candidate texts.
  bool same_support(const ToyPolicy& other) const;
  void require_same_support(const ToyPolicy& other) const;  // throws VocabMismatch

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<std::vector<double>> bias_;
  std::vector<double> shared_;
};

LogitGradient zero_logit_gradient(const ToyPolicy& policy);

using chartkit::Rng;

}  // namespace chartkit::grpo
