#pragma once

#include <span>
#include <vector>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/types.hpp"
#include "jdrec/evaluator/evaluator.hpp"
#include "jdrec/model/encoder.hpp"
#include "jdrec/nn/dense.hpp"

namespace jdrec::evaluator {

// Context-free CTR baseline: the evaluator's per-item network followed by a
// single-logit head, trained on individual exposed items.
class PointwiseModel {
 public:
  PointwiseModel(data::FeatureSchema schema, std::vector<std::size_t> hidden, Rng& init_rng);

  std::vector<double> predict(const data::CandidateSet& cs,
                              std::span<const data::ItemIndex> items) const;

  // Masked loss over exposed slate positions of the batch.
  double loss_and_gradient(std::span<const data::LoggedSample* const> batch,
                           nn::Gradients* grads) const;

  std::vector<nn::ParamRef> parameters();

 private:
  model::FeatureEncoder encoder_;
  std::vector<nn::DenseLayer> layers_;
};

double pointwise_auc(const PointwiseModel& model, std::span<const data::LoggedSample> samples);

struct PointwiseTrainResult {
  PointwiseModel model;
  std::vector<EvaluatorEpoch> epochs;
};

PointwiseTrainResult train_pointwise(std::span<const data::LoggedSample> train,
                                     std::span<const data::LoggedSample> holdout,
                                     const data::FeatureSchema& schema,
                                     std::vector<std::size_t> hidden,
                                     const EvaluatorTrainConfig& train_config);

}  // namespace jdrec::evaluator
