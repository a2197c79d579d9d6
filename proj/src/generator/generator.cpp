#include "jdrec/generator/generator.hpp"

#include "jdrec/core/error.hpp"
#include "jdrec/generator/policy.hpp"
#include "jdrec/kernels/kernels.hpp"
#include "jdrec/model/layers.hpp"

namespace jdrec::generator {

using nn::Matrix;

nlohmann::json GeneratorConfig::to_json() const {
  return {{"point_hidden", point_hidden}, {"rank_hidden", rank_hidden}, {"list_len", list_len}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  c.point_hidden = j.at("point_hidden").get<std::vector<std::size_t>>();
  c.rank_hidden = j.at("rank_hidden").get<std::vector<std::size_t>>();
  c.list_len = j.at("list_len").get<std::size_t>();
  return c;
}

GeneratorModel::GeneratorModel(data::FeatureSchema schema, GeneratorConfig config, Rng& init_rng)
    : config_(std::move(config)), encoder_(std::move(schema), init_rng) {
  if (config_.list_len == 0) throw ConfigError("generator: list length must be positive");
  if (config_.point_hidden.empty()) throw ConfigError("generator: point network needs a layer");
  std::vector<std::size_t> point_dims{encoder_.output_dim()};
  point_dims.insert(point_dims.end(), config_.point_hidden.begin(), config_.point_hidden.end());
  point_ = nn::make_mlp(point_dims, nn::Activation::relu, nn::Activation::relu, init_rng);

  std::vector<std::size_t> rank_dims{2 * config_.point_hidden.back()};
  rank_dims.insert(rank_dims.end(), config_.rank_hidden.begin(), config_.rank_hidden.end());
  rank_dims.push_back(config_.list_len + 1);
  rank_ = nn::make_mlp(rank_dims, nn::Activation::relu, nn::Activation::identity, init_rng);
}

void GeneratorModel::zero_rank_output() { model::zero_layer(rank_.back()); }

GeneratorModel::Trace GeneratorModel::forward(const data::CandidateSet& cs) const {
  const std::size_t n = cs.size();
  if (n < config_.list_len) {
    throw UsageError("generator: " + std::to_string(n) + " candidates, fewer than L=" +
                     std::to_string(config_.list_len));
  }
  Trace t;
  t.point_acts = nn::forward(point_, encoder_.encode_all(cs));
  const Matrix& h = t.point_acts.back();
  const std::size_t hd = h.cols();

  std::vector<double> pooled(hd);
  t.pool_argmax.resize(hd);
  kernels::active().column_max(n, hd, h.data(), pooled.data(), t.pool_argmax.data());

  Matrix joint(n, 2 * hd);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = joint.row(r);
    const auto src = h.row(r);
    std::copy(src.begin(), src.end(), row.begin());
    std::copy(pooled.begin(), pooled.end(), row.begin() + static_cast<std::ptrdiff_t>(hd));
  }
  t.rank_acts = nn::forward(rank_, joint);
  t.logits = t.rank_acts.back().transposed();
  return t;
}

data::PolicyMatrix GeneratorModel::policy_matrix(const data::CandidateSet& cs) const {
  return column_softmax(forward(cs).logits);
}

void GeneratorModel::backward(const data::CandidateSet& cs, const Trace& trace,
                              const Matrix& grad_logits, nn::Gradients& grads) const {
  if (!grad_logits.same_shape(trace.logits)) throw ConfigError("generator backward: shape mismatch");
  const auto rank_back = nn::backward(rank_, trace.rank_acts, grad_logits.transposed());
  const Matrix& djoint = rank_back.input_grad;
  const std::size_t n = djoint.rows();
  const std::size_t hd = djoint.cols() / 2;

  Matrix dh(n, hd);
  std::vector<double> dpool(hd, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = djoint.row(r);
    for (std::size_t c = 0; c < hd; ++c) {
      dh(r, c) = row[c];
      dpool[c] += row[hd + c];
    }
  }
  for (std::size_t c = 0; c < hd; ++c) dh(trace.pool_argmax[c], c) += dpool[c];

  const auto point_back = nn::backward(point_, trace.point_acts, dh);
  const std::size_t tables = encoder_.table_count();
  std::vector<data::ItemIndex> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<data::ItemIndex>(i);
  encoder_.backward(cs, all, point_back.input_grad, 0, std::span<Matrix>(grads.data(), tables));
  const std::size_t offset = model::accumulate_layer_gradients(grads, tables, point_back.layers);
  model::accumulate_layer_gradients(grads, offset, rank_back.layers);
}

std::vector<nn::ParamRef> GeneratorModel::parameters() {
  std::vector<nn::ParamRef> out;
  encoder_.append_parameters(out, "");
  model::append_layer_parameters(out, point_, "point/");
  model::append_layer_parameters(out, rank_, "rank/");
  return out;
}

std::uint64_t GeneratorModel::checksum() const {
  auto params = const_cast<GeneratorModel*>(this)->parameters();
  return nn::parameter_checksum(params);
}

nn::Checkpoint GeneratorModel::to_checkpoint(const nn::AdaGradState* optimizer) const {
  nn::Checkpoint ckpt;
  nlohmann::json meta{{"kind", "generator"}, {"config", config_.to_json()},
                      {"schema", schema().to_json()}};
  if (optimizer) {
    meta["optimizer"] = {{"learning_rate", optimizer->learning_rate},
                         {"epsilon", optimizer->epsilon}};
  }
  ckpt.metadata = meta.dump();
  auto params = const_cast<GeneratorModel*>(this)->parameters();
  nn::store_parameters(ckpt, params, optimizer);
  return ckpt;
}

GeneratorModel GeneratorModel::from_checkpoint(const nn::Checkpoint& ckpt,
                                               nn::AdaGradState* optimizer) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ckpt.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
  if (meta.value("kind", "") != "generator") throw DataError("checkpoint is not a generator");
  Rng unused(0);
  GeneratorModel model(data::FeatureSchema::from_json(meta.at("schema")),
                       GeneratorConfig::from_json(meta.at("config")), unused);
  if (optimizer && meta.contains("optimizer")) {
    optimizer->learning_rate = meta["optimizer"].at("learning_rate").get<double>();
    optimizer->epsilon = meta["optimizer"].at("epsilon").get<double>();
  }
  auto params = model.parameters();
  nn::restore_parameters(ckpt, params, optimizer);
  return model;
}

}  // namespace jdrec::generator
