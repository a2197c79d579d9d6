#include "jdrec/evaluator/pointwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jdrec/core/error.hpp"
#include "jdrec/evaluator/metrics.hpp"
#include "jdrec/model/layers.hpp"

namespace jdrec::evaluator {

using nn::Matrix;

PointwiseModel::PointwiseModel(data::FeatureSchema schema, std::vector<std::size_t> hidden,
                               Rng& init_rng)
    : encoder_(std::move(schema), init_rng) {
  std::vector<std::size_t> dims{encoder_.output_dim()};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  layers_ = nn::make_mlp(dims, nn::Activation::relu, nn::Activation::identity, init_rng);
}

std::vector<double> PointwiseModel::predict(const data::CandidateSet& cs,
                                            std::span<const data::ItemIndex> items) const {
  const auto acts = nn::forward(layers_, encoder_.encode(cs, items));
  std::vector<double> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out[i] = nn::sigmoid(acts.back()(i, 0));
  return out;
}

double PointwiseModel::loss_and_gradient(std::span<const data::LoggedSample* const> batch,
                                         nn::Gradients* grads) const {
  std::size_t rows = 0;
  for (const auto* s : batch) rows += s->selected.size();
  Matrix x(rows, encoder_.output_dim());
  std::size_t r = 0;
  for (const auto* s : batch) {
    encoder_.encode_into(s->candidates, s->selected.items, x, r);
    r += s->selected.size();
  }
  const auto acts = nn::forward(layers_, x);
  Matrix dlogits(rows, 1);
  double loss = 0.0;
  r = 0;
  for (const auto* s : batch) {
    for (std::size_t i = 0; i < s->selected.size(); ++i, ++r) {
      if (!s->selected.exposure[i]) continue;
      const double p = nn::sigmoid(acts.back()(r, 0));
      const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
      const bool clicked = s->selected.click[i] != 0;
      loss -= clicked ? std::log(pc) : std::log(1.0 - pc);
      if (p == pc) dlogits(r, 0) = p - (clicked ? 1.0 : 0.0);
    }
  }
  if (grads == nullptr) return loss;
  const auto back = nn::backward(layers_, acts, dlogits);
  const std::size_t tables = encoder_.table_count();
  std::span<Matrix> table_grads(grads->data(), tables);
  r = 0;
  for (const auto* s : batch) {
    encoder_.backward(s->candidates, s->selected.items, back.input_grad, r, table_grads);
    r += s->selected.size();
  }
  model::accumulate_layer_gradients(*grads, tables, back.layers);
  return loss;
}

std::vector<nn::ParamRef> PointwiseModel::parameters() {
  std::vector<nn::ParamRef> out;
  encoder_.append_parameters(out, "");
  model::append_layer_parameters(out, layers_, "point/");
  return out;
}

double pointwise_auc(const PointwiseModel& model, std::span<const data::LoggedSample> samples) {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& s : samples) {
    const auto p = model.predict(s.candidates, s.selected.items);
    for (std::size_t i = 0; i < s.selected.size(); ++i) {
      if (!s.selected.exposure[i]) continue;
      scores.push_back(p[i]);
      labels.push_back(s.selected.click[i]);
    }
  }
  return auc(scores, labels);
}

PointwiseTrainResult train_pointwise(std::span<const data::LoggedSample> train,
                                     std::span<const data::LoggedSample> holdout,
                                     const data::FeatureSchema& schema,
                                     std::vector<std::size_t> hidden,
                                     const EvaluatorTrainConfig& train_config) {
  if (train.empty()) throw UsageError("train_pointwise: empty training set");
  Rng init = Rng::stream(train_config.seed, "init");
  Rng shuffle = Rng::stream(train_config.seed, "shuffle");
  PointwiseModel model(schema, std::move(hidden), init);
  auto params = model.parameters();
  auto state = nn::AdaGradState::zeros_for(params, train_config.optimizer);
  std::vector<EvaluatorEpoch> epochs;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const data::LoggedSample*> batch;
  for (std::size_t e = 0; e < train_config.epochs; ++e) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + train_config.batch_size); ++i) {
        batch.push_back(&train[order[i]]);
      }
      nn::Gradients grads = nn::zero_gradients(params);
      const double loss = model.loss_and_gradient(batch, &grads);
      if (!std::isfinite(loss)) throw NumericError("pointwise training: non-finite loss");
      total += loss;
      nn::adagrad_step(params, grads, state);
    }
    EvaluatorEpoch m{e + 1, total / static_cast<double>(train.size()),
                     std::numeric_limits<double>::quiet_NaN()};
    if (!holdout.empty()) {
      try {
        m.auc = pointwise_auc(model, holdout);
      } catch (const UsageError&) {
      }
    }
    epochs.push_back(m);
  }
  return {std::move(model), std::move(epochs)};
}

}  // namespace jdrec::evaluator
