#include "jdrec/nn/adagrad.hpp"

#include <string>

#include "jdrec/core/error.hpp"
#include "jdrec/kernels/kernels.hpp"

namespace jdrec::nn {

AdaGradState AdaGradState::zeros_for(std::span<const ParamRef> params, AdaGradConfig config) {
  if (!(config.learning_rate > 0.0) || !(config.epsilon > 0.0)) {
    throw ConfigError("adagrad: learning rate and epsilon must be positive");
  }
  AdaGradState state;
  state.learning_rate = config.learning_rate;
  state.epsilon = config.epsilon;
  for (const ParamRef& p : params) state.accumulators.emplace_back(p.value->rows(), p.value->cols());
  return state;
}

void adagrad_step(std::span<const ParamRef> params, std::span<const Matrix> grads,
                  AdaGradState& state) {
  if (params.size() != grads.size() || params.size() != state.accumulators.size()) {
    throw ConfigError("adagrad: " + std::to_string(params.size()) + " params, " +
                      std::to_string(grads.size()) + " grads, " +
                      std::to_string(state.accumulators.size()) + " accumulators");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].value->same_shape(grads[i]) ||
        !params[i].value->same_shape(state.accumulators[i])) {
      throw ConfigError("adagrad: shape mismatch for parameter '" + params[i].name + "'");
    }
    if (!grads[i].all_finite()) {
      throw NumericError("adagrad: non-finite gradient for parameter '" + params[i].name + "'");
    }
  }
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    k.adagrad(grads[i].size(), params[i].value->data(), grads[i].data(),
              state.accumulators[i].data(), state.learning_rate, state.epsilon);
  }
}

}  // namespace jdrec::nn
