#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "jdrec/core/rng.hpp"
#include "jdrec/data/types.hpp"
#include "jdrec/model/encoder.hpp"
#include "jdrec/nn/adagrad.hpp"
#include "jdrec/nn/checkpoint.hpp"
#include "jdrec/nn/dense.hpp"

namespace jdrec::generator {

struct GeneratorConfig {
  std::vector<std::size_t> point_hidden{64, 32};
  std::vector<std::size_t> rank_hidden{64};
  std::size_t list_len = 4;

  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
};

// Set-to-policy generator. Each item goes through a point network; a
// column-wise max over all items gives the set feature, which is appended to
// every item representation before a rank classifier emits L+1 logits per
// item. Every stage is per-item or symmetric, so permuting the candidates
// permutes the output columns identically.
class GeneratorModel {
 public:
  struct Trace {
    std::vector<nn::Matrix> point_acts;
    std::vector<nn::Matrix> rank_acts;
    std::vector<std::uint32_t> pool_argmax;
    nn::Matrix logits;  // (L+1) x N
  };

  GeneratorModel(data::FeatureSchema schema, GeneratorConfig config, Rng& init_rng);

  const GeneratorConfig& config() const noexcept { return config_; }
  const data::FeatureSchema& schema() const noexcept { return encoder_.schema(); }
  std::size_t list_len() const noexcept { return config_.list_len; }

  Trace forward(const data::CandidateSet& cs) const;
  nn::Matrix logits(const data::CandidateSet& cs) const { return forward(cs).logits; }
  data::PolicyMatrix policy_matrix(const data::CandidateSet& cs) const;

  // Adds dLoss/dparameters (parameters() order) for dLoss/dlogits.
  void backward(const data::CandidateSet& cs, const Trace& trace, const nn::Matrix& grad_logits,
                nn::Gradients& grads) const;

  std::vector<nn::ParamRef> parameters();
  std::uint64_t checksum() const;
  void zero_rank_output();

  nn::Checkpoint to_checkpoint(const nn::AdaGradState* optimizer = nullptr) const;
  static GeneratorModel from_checkpoint(const nn::Checkpoint& ckpt,
                                        nn::AdaGradState* optimizer = nullptr);

 private:
  GeneratorConfig config_;
  model::FeatureEncoder encoder_;
  std::vector<nn::DenseLayer> point_;
  std::vector<nn::DenseLayer> rank_;
};

}  // namespace jdrec::generator
