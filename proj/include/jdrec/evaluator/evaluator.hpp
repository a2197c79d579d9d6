#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/schema.hpp"
#include "jdrec/data/types.hpp"
#include "jdrec/model/encoder.hpp"
#include "jdrec/nn/adagrad.hpp"
#include "jdrec/nn/checkpoint.hpp"
#include "jdrec/nn/dense.hpp"

namespace jdrec::evaluator {

struct EvaluatorConfig {
  std::vector<std::size_t> point_hidden{64, 32};
  std::vector<std::size_t> head_hidden{64};
  std::size_t list_len = 4;
  // Start with a zero output layer: every prediction is 0.5 until trained.
  bool zero_init_output = false;

  nlohmann::json to_json() const;
  static EvaluatorConfig from_json(const nlohmann::json& j);
};

struct EvaluationResult {
  std::vector<double> per_item_ctr;  // one per slate position
  double list_score = 0.0;           // sum of per_item_ctr
};

// List evaluator: shared embeddings, a per-item point network, then a head
// over the concatenated item representations that emits one CTR per
// position. Each prediction depends on the whole ordered slate.
class EvaluatorModel {
 public:
  EvaluatorModel(data::FeatureSchema schema, EvaluatorConfig config, Rng& init_rng);

  const EvaluatorConfig& config() const noexcept { return config_; }
  const data::FeatureSchema& schema() const noexcept { return encoder_.schema(); }
  std::size_t list_len() const noexcept { return config_.list_len; }

  EvaluationResult predict(const data::CandidateSet& cs, const data::Slate& slate) const;
  // Shares the per-item network across all slates of one request.
  std::vector<EvaluationResult> predict_many(const data::CandidateSet& cs,
                                             std::span<const data::Slate> slates) const;

  // Sum of the masked loss over the batch; adds parameter gradients into
  // grads (parameters() order) when non-null.
  double loss_and_gradient(std::span<const data::LoggedSample* const> batch,
                           nn::Gradients* grads) const;

  std::vector<nn::ParamRef> parameters();
  std::uint64_t checksum() const;
  void zero_output_layer();

  nn::Checkpoint to_checkpoint(const nn::AdaGradState* optimizer = nullptr) const;
  static EvaluatorModel from_checkpoint(const nn::Checkpoint& ckpt,
                                        nn::AdaGradState* optimizer = nullptr);

 private:
  nn::Matrix head_input(const nn::Matrix& item_repr, std::span<const data::Slate> slates) const;
  void check_slate(const data::CandidateSet& cs, const data::Slate& slate) const;

  EvaluatorConfig config_;
  model::FeatureEncoder encoder_;
  std::vector<nn::DenseLayer> point_;
  std::vector<nn::DenseLayer> head_;
};

// Index of the slate with the highest list_score; ties go to the lowest
// index. Throws UsageError on an empty list.
std::size_t select_best(std::span<const data::Slate> slates, const EvaluatorModel& model,
                        const data::CandidateSet& cs);

// AUC of the model's per-position CTRs against clicks on exposed positions.
double evaluator_auc(const EvaluatorModel& model, std::span<const data::LoggedSample> samples);

struct EvaluatorTrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  nn::AdaGradConfig optimizer{};
  std::uint64_t seed = 1;
};

struct EvaluatorEpoch {
  std::size_t epoch = 0;
  double loss = 0.0;  // mean per-sample training loss during the epoch
  double auc = 0.0;   // holdout AUC after the epoch; NaN when undefined
};

// Incremental trainer: keeps the AdaGrad state across calls so a model can be
// retrained day by day.
class EvaluatorTrainer {
 public:
  EvaluatorTrainer(EvaluatorModel& model, nn::AdaGradConfig optimizer);
  EvaluatorTrainer(EvaluatorModel& model, nn::AdaGradState state);

  // One shuffled pass; returns the mean per-sample loss. Throws NumericError
  // on a non-finite loss.
  double run_epoch(std::span<const data::LoggedSample> samples, std::size_t batch_size, Rng& rng);

  const nn::AdaGradState& state() const noexcept { return state_; }

 private:
  EvaluatorModel& model_;
  nn::AdaGradState state_;
};

struct EvaluatorTrainResult {
  EvaluatorModel model;
  std::vector<EvaluatorEpoch> epochs;
  nn::AdaGradState optimizer;
};

EvaluatorTrainResult train_evaluator(std::span<const data::LoggedSample> train,
                                     std::span<const data::LoggedSample> holdout,
                                     const data::FeatureSchema& schema,
                                     const EvaluatorConfig& model_config,
                                     const EvaluatorTrainConfig& train_config);

}  // namespace jdrec::evaluator
