#pragma once

#include <span>
#include <vector>

#include "jdrec/nn/matrix.hpp"
#include "jdrec/nn/parameters.hpp"

namespace jdrec::nn {

struct AdaGradConfig {
  double learning_rate = 0.01;
  double epsilon = 1e-8;
};

// Per-parameter squared-gradient accumulators, one matrix per parameter.
struct AdaGradState {
  std::vector<Matrix> accumulators;
  double learning_rate = 0.01;
  double epsilon = 1e-8;

  static AdaGradState zeros_for(std::span<const ParamRef> params, AdaGradConfig config = {});
};

// accum += g^2; param -= lr * g / sqrt(accum + eps), for every parameter.
// Throws NumericError naming the first parameter with a non-finite gradient;
// nothing is updated in that case.
void adagrad_step(std::span<const ParamRef> params, std::span<const Matrix> grads,
                  AdaGradState& state);

}  // namespace jdrec::nn
