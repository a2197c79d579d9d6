#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/types.hpp"
#include "jdrec/evaluator/evaluator.hpp"
#include "jdrec/generator/generator.hpp"
#include "jdrec/nn/adagrad.hpp"
#include "jdrec/training/policy_gradient.hpp"

namespace jdrec::training {

// naive: supervised Softmax2D toward the logged (evaluator-selected) lists.
// ctr: policy gradient with the frozen evaluator's average CTR as reward.
enum class TrainMode { naive, ctr };

TrainMode parse_train_mode(std::string_view text);
const char* to_string(TrainMode mode) noexcept;

struct GeneratorTrainConfig {
  TrainMode mode = TrainMode::naive;
  std::size_t epochs = 10;
  std::size_t batch_size = 16;  // requests per update
  nn::AdaGradConfig optimizer{};
  double lambda = 1.0;
  double temperature = 5.0;
  std::size_t rounds = 32;       // k: policy samples per request in ctr mode
  std::size_t eval_slates = 8;   // policy samples per request for Average CTR
  bool include_logged = true;    // add the logged list to each ctr batch
  bool include_top_ctr = true;   // add the evaluator-greedy list too
  std::uint64_t seed = 1;
};

struct GeneratorEpoch {
  std::size_t epoch = 0;
  double mean_reward = 0.0;         // training reward (naive: fraction of exact logged hits)
  double average_ctr = 0.0;         // holdout, frozen evaluator, policy samples
  double selection_accuracy = 0.0;  // holdout vs logged lists
  double rank_accuracy = 0.0;
  double softmax2d_loss = 0.0;      // holdout, mean per request
};

struct HoldoutMetrics {
  double average_ctr = 0.0;
  double selection_accuracy = 0.0;
  double rank_accuracy = 0.0;
  double softmax2d_loss = 0.0;
};

// Incremental trainer; keeps the AdaGrad state across calls.
class GeneratorTrainer {
 public:
  GeneratorTrainer(generator::GeneratorModel& model, GeneratorTrainConfig config);
  GeneratorTrainer(generator::GeneratorModel& model, GeneratorTrainConfig config,
                   nn::AdaGradState state);

  // One shuffled supervised pass; returns the mean Softmax2D loss.
  double naive_epoch(std::span<const data::LoggedSample> samples, Rng& rng);

  // One shuffled policy-gradient pass; returns the mean reward over all
  // scored slates.
  double ctr_epoch(std::span<const data::LoggedSample> samples,
                   const evaluator::EvaluatorModel& evaluator, Rng& rng);

  // evaluator may be null, in which case average_ctr is NaN.
  HoldoutMetrics evaluate(std::span<const data::LoggedSample> holdout,
                          const evaluator::EvaluatorModel* evaluator, Rng& rng) const;

  const nn::AdaGradState& state() const noexcept { return state_; }
  const GeneratorTrainConfig& config() const noexcept { return config_; }
  void set_mode(TrainMode mode) noexcept { config_.mode = mode; }

 private:
  generator::GeneratorModel& model_;
  GeneratorTrainConfig config_;
  nn::AdaGradState state_;
};

struct GeneratorTrainResult {
  generator::GeneratorModel model;
  std::vector<GeneratorEpoch> epochs;
  nn::AdaGradState optimizer;
};

// Trains a fresh generator. The evaluator is only read: it scores ctr-mode
// rewards and the per-epoch Average CTR in both modes.
GeneratorTrainResult train_generator(std::span<const data::LoggedSample> train,
                                     std::span<const data::LoggedSample> holdout,
                                     const evaluator::EvaluatorModel& evaluator,
                                     const generator::GeneratorConfig& model_config,
                                     const GeneratorTrainConfig& train_config);

}  // namespace jdrec::training
