#include "jdrec/evaluator/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jdrec/core/error.hpp"
#include "jdrec/evaluator/metrics.hpp"
#include "jdrec/model/layers.hpp"

namespace jdrec::evaluator {

using nn::Matrix;

nlohmann::json EvaluatorConfig::to_json() const {
  return {{"point_hidden", point_hidden},
          {"head_hidden", head_hidden},
          {"list_len", list_len},
          {"zero_init_output", zero_init_output}};
}

EvaluatorConfig EvaluatorConfig::from_json(const nlohmann::json& j) {
  EvaluatorConfig c;
  c.point_hidden = j.at("point_hidden").get<std::vector<std::size_t>>();
  c.head_hidden = j.at("head_hidden").get<std::vector<std::size_t>>();
  c.list_len = j.at("list_len").get<std::size_t>();
  c.zero_init_output = j.value("zero_init_output", false);
  return c;
}

EvaluatorModel::EvaluatorModel(data::FeatureSchema schema, EvaluatorConfig config, Rng& init_rng)
    : config_(std::move(config)), encoder_(std::move(schema), init_rng) {
  if (config_.list_len == 0) throw ConfigError("evaluator: list length must be positive");
  if (config_.point_hidden.empty()) throw ConfigError("evaluator: point network needs a layer");
  std::vector<std::size_t> point_dims{encoder_.output_dim()};
  point_dims.insert(point_dims.end(), config_.point_hidden.begin(), config_.point_hidden.end());
  point_ = nn::make_mlp(point_dims, nn::Activation::relu, nn::Activation::relu, init_rng);

  std::vector<std::size_t> head_dims{config_.point_hidden.back() * config_.list_len};
  head_dims.insert(head_dims.end(), config_.head_hidden.begin(), config_.head_hidden.end());
  head_dims.push_back(config_.list_len);
  head_ = nn::make_mlp(head_dims, nn::Activation::relu, nn::Activation::identity, init_rng);
  if (config_.zero_init_output) zero_output_layer();
}

void EvaluatorModel::zero_output_layer() { model::zero_layer(head_.back()); }

void EvaluatorModel::check_slate(const data::CandidateSet& cs, const data::Slate& slate) const {
  if (slate.size() != config_.list_len) {
    throw UsageError("evaluator: slate length " + std::to_string(slate.size()) +
                     " != model list length " + std::to_string(config_.list_len));
  }
  for (std::size_t i = 0; i < slate.items.size(); ++i) {
    const auto idx = slate.items[i];
    if (idx >= cs.size()) throw UsageError("evaluator: slate index out of range");
    for (std::size_t j = 0; j < i; ++j) {
      if (slate.items[j] == idx) {
        throw DataError("evaluator: item " + std::to_string(idx) + " repeated in slate");
      }
    }
  }
}

Matrix EvaluatorModel::head_input(const Matrix& item_repr, std::span<const data::Slate> slates) const {
  const std::size_t h = item_repr.cols();
  Matrix out(slates.size(), h * config_.list_len);
  for (std::size_t s = 0; s < slates.size(); ++s) {
    auto row = out.row(s);
    for (std::size_t i = 0; i < config_.list_len; ++i) {
      const auto src = item_repr.row(slates[s].items[i]);
      std::copy(src.begin(), src.end(), row.begin() + static_cast<std::ptrdiff_t>(i * h));
    }
  }
  return out;
}

std::vector<EvaluationResult> EvaluatorModel::predict_many(const data::CandidateSet& cs,
                                                           std::span<const data::Slate> slates) const {
  if (cs.items.size() > 0 && cs.items.front().categorical.size() != schema().item_categorical_count()) {
    throw ConfigError("evaluator: candidate features do not match the model schema");
  }
  for (const auto& s : slates) check_slate(cs, s);
  std::vector<EvaluationResult> out;
  if (slates.empty()) return out;
  const auto point_acts = nn::forward(point_, encoder_.encode_all(cs));
  const auto head_acts = nn::forward(head_, head_input(point_acts.back(), slates));
  const Matrix& logits = head_acts.back();
  out.resize(slates.size());
  for (std::size_t s = 0; s < slates.size(); ++s) {
    auto& r = out[s];
    r.per_item_ctr.resize(config_.list_len);
    for (std::size_t i = 0; i < config_.list_len; ++i) {
      r.per_item_ctr[i] = nn::sigmoid(logits(s, i));
      r.list_score += r.per_item_ctr[i];
    }
  }
  return out;
}

EvaluationResult EvaluatorModel::predict(const data::CandidateSet& cs, const data::Slate& slate) const {
  return predict_many(cs, std::span<const data::Slate>(&slate, 1)).front();
}

double EvaluatorModel::loss_and_gradient(std::span<const data::LoggedSample* const> batch,
                                         nn::Gradients* grads) const {
  const std::size_t L = config_.list_len;
  const std::size_t B = batch.size();
  if (B == 0) return 0.0;
  Matrix x(B * L, encoder_.output_dim());
  for (std::size_t b = 0; b < B; ++b) {
    const auto& s = *batch[b];
    check_slate(s.candidates, s.selected);
    if (!s.selected.labeled()) throw UsageError("evaluator training needs labeled slates");
    encoder_.encode_into(s.candidates, s.selected.items, x, b * L);
  }
  const auto point_acts = nn::forward(point_, x);
  const Matrix& h = point_acts.back();
  // Rows of one sample are contiguous, so (B*L x h) reinterprets as (B x L*h).
  Matrix concat(B, L * h.cols(), std::vector<double>(h.values().begin(), h.values().end()));
  const auto head_acts = nn::forward(head_, concat);
  const Matrix& logits = head_acts.back();

  double loss = 0.0;
  Matrix dlogits(B, L);
  for (std::size_t b = 0; b < B; ++b) {
    const auto& slate = batch[b]->selected;
    for (std::size_t i = 0; i < L; ++i) {
      if (!slate.exposure[i]) continue;
      const double p = nn::sigmoid(logits(b, i));
      const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
      const bool clicked = slate.click[i] != 0;
      loss -= clicked ? std::log(pc) : std::log(1.0 - pc);
      if (p == pc) dlogits(b, i) = p - (clicked ? 1.0 : 0.0);
    }
  }
  if (grads == nullptr) return loss;

  const auto head_back = nn::backward(head_, head_acts, dlogits);
  const Matrix& dconcat = head_back.input_grad;
  Matrix dh(B * L, h.cols(), std::vector<double>(dconcat.values().begin(), dconcat.values().end()));
  const auto point_back = nn::backward(point_, point_acts, dh);

  const std::size_t tables = encoder_.table_count();
  std::span<Matrix> table_grads(grads->data(), tables);
  for (std::size_t b = 0; b < B; ++b) {
    encoder_.backward(batch[b]->candidates, batch[b]->selected.items, point_back.input_grad, b * L,
                      table_grads);
  }
  std::size_t offset = model::accumulate_layer_gradients(*grads, tables, point_back.layers);
  model::accumulate_layer_gradients(*grads, offset, head_back.layers);
  return loss;
}

std::vector<nn::ParamRef> EvaluatorModel::parameters() {
  std::vector<nn::ParamRef> out;
  encoder_.append_parameters(out, "");
  model::append_layer_parameters(out, point_, "point/");
  model::append_layer_parameters(out, head_, "head/");
  return out;
}

std::uint64_t EvaluatorModel::checksum() const {
  auto params = const_cast<EvaluatorModel*>(this)->parameters();
  return nn::parameter_checksum(params);
}

nn::Checkpoint EvaluatorModel::to_checkpoint(const nn::AdaGradState* optimizer) const {
  nn::Checkpoint ckpt;
  nlohmann::json meta{{"kind", "evaluator"}, {"config", config_.to_json()},
                      {"schema", schema().to_json()}};
  if (optimizer) {
    meta["optimizer"] = {{"learning_rate", optimizer->learning_rate},
                         {"epsilon", optimizer->epsilon}};
  }
  ckpt.metadata = meta.dump();
  auto params = const_cast<EvaluatorModel*>(this)->parameters();
  nn::store_parameters(ckpt, params, optimizer);
  return ckpt;
}

EvaluatorModel EvaluatorModel::from_checkpoint(const nn::Checkpoint& ckpt,
                                               nn::AdaGradState* optimizer) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ckpt.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
  if (meta.value("kind", "") != "evaluator") throw DataError("checkpoint is not an evaluator");
  Rng unused(0);
  EvaluatorModel model(data::FeatureSchema::from_json(meta.at("schema")),
                       EvaluatorConfig::from_json(meta.at("config")), unused);
  auto params = model.parameters();
  if (optimizer && meta.contains("optimizer")) {
    optimizer->learning_rate = meta["optimizer"].at("learning_rate").get<double>();
    optimizer->epsilon = meta["optimizer"].at("epsilon").get<double>();
  }
  nn::restore_parameters(ckpt, params, optimizer);
  return model;
}

std::size_t select_best(std::span<const data::Slate> slates, const EvaluatorModel& model,
                        const data::CandidateSet& cs) {
  if (slates.empty()) throw UsageError("select_best: no candidate lists");
  const auto results = model.predict_many(cs, slates);
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].list_score > results[best].list_score) best = i;
  }
  return best;
}

double evaluator_auc(const EvaluatorModel& model, std::span<const data::LoggedSample> samples) {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& s : samples) {
    const auto r = model.predict(s.candidates, s.selected);
    for (std::size_t i = 0; i < s.selected.size(); ++i) {
      if (!s.selected.exposure[i]) continue;
      scores.push_back(r.per_item_ctr[i]);
      labels.push_back(s.selected.click[i]);
    }
  }
  return auc(scores, labels);
}

EvaluatorTrainer::EvaluatorTrainer(EvaluatorModel& model, nn::AdaGradConfig optimizer)
    : model_(model), state_(nn::AdaGradState::zeros_for(model.parameters(), optimizer)) {}

EvaluatorTrainer::EvaluatorTrainer(EvaluatorModel& model, nn::AdaGradState state)
    : model_(model), state_(std::move(state)) {}

double EvaluatorTrainer::run_epoch(std::span<const data::LoggedSample> samples,
                                   std::size_t batch_size, Rng& rng) {
  if (samples.empty()) throw UsageError("evaluator training: empty training set");
  if (batch_size == 0) throw ConfigError("evaluator training: batch size must be positive");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  auto params = model_.parameters();
  double total = 0.0;
  std::vector<const data::LoggedSample*> batch;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    batch.clear();
    for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
      batch.push_back(&samples[order[i]]);
    }
    nn::Gradients grads = nn::zero_gradients(params);
    const double loss = model_.loss_and_gradient(batch, &grads);
    if (!std::isfinite(loss)) {
      throw NumericError("evaluator training: non-finite loss in batch starting at sample " +
                         std::to_string(order[start]));
    }
    total += loss;
    nn::adagrad_step(params, grads, state_);
  }
  return total / static_cast<double>(samples.size());
}

EvaluatorTrainResult train_evaluator(std::span<const data::LoggedSample> train,
                                     std::span<const data::LoggedSample> holdout,
                                     const data::FeatureSchema& schema,
                                     const EvaluatorConfig& model_config,
                                     const EvaluatorTrainConfig& train_config) {
  if (train.empty()) throw UsageError("train_evaluator: empty training set");
  Rng init = Rng::stream(train_config.seed, "init");
  Rng shuffle = Rng::stream(train_config.seed, "shuffle");
  EvaluatorModel model(schema, model_config, init);
  EvaluatorTrainer trainer(model, train_config.optimizer);
  std::vector<EvaluatorEpoch> epochs;
  for (std::size_t e = 0; e < train_config.epochs; ++e) {
    EvaluatorEpoch m;
    m.epoch = e + 1;
    m.loss = trainer.run_epoch(train, train_config.batch_size, shuffle);
    m.auc = std::numeric_limits<double>::quiet_NaN();
    if (!holdout.empty()) {
      try {
        m.auc = evaluator_auc(model, holdout);
      } catch (const UsageError&) {
      }
    }
    epochs.push_back(m);
  }
  nn::AdaGradState state = trainer.state();
  return {std::move(model), std::move(epochs), std::move(state)};
}

}  // namespace jdrec::evaluator
