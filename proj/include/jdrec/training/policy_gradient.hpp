#pragma once

#include <vector>

#include "jdrec/data/types.hpp"
#include "jdrec/generator/generator.hpp"
#include "jdrec/nn/adagrad.hpp"

namespace jdrec::training {

struct BatchEntry {
  const data::CandidateSet* candidates = nullptr;
  std::vector<data::Slate> slates;
  std::vector<double> rewards;    // aligned with slates
  std::vector<double> log_probs;  // filled by the surrogate evaluation
};

struct TrainBatch {
  std::vector<BatchEntry> entries;

  std::size_t slate_count() const noexcept;
};

struct PolicyGradientStats {
  double mean_reward = 0.0;
  double mean_entropy = 0.0;  // mean entropy of the temperature rows
  double surrogate = 0.0;     // -sum (reward - baseline) * log_prob
  std::size_t slates = 0;
};

// REINFORCE surrogate over the batch with the batch-mean reward as baseline.
// Adds its parameter gradient into grads when non-null and records the
// per-slate log-probabilities in the batch.
PolicyGradientStats policy_gradient_surrogate(const generator::GeneratorModel& model,
                                              TrainBatch& batch, double temperature,
                                              nn::Gradients* grads);

// Surrogate gradient followed by one AdaGrad update. Throws NumericError
// naming the offending request and slate on a non-finite log-probability.
PolicyGradientStats policy_gradient_step(generator::GeneratorModel& model, TrainBatch& batch,
                                         nn::AdaGradState& optimizer, double temperature);

}  // namespace jdrec::training
