#pragma once

#include <span>
#include <string>
#include <vector>

#include "jdrec/core/rng.hpp"
#include "jdrec/nn/matrix.hpp"

namespace jdrec::nn {

enum class Activation { identity, relu, sigmoid };

const char* to_string(Activation a) noexcept;
Activation activation_from_string(const std::string& name);

// Affine layer y = act(x W + b). weights is in_dim x out_dim, bias 1 x out_dim.
struct DenseLayer {
  Matrix weights;
  Matrix bias;
  Activation activation = Activation::identity;

  std::size_t in_dim() const noexcept { return weights.rows(); }
  std::size_t out_dim() const noexcept { return weights.cols(); }
};

// Glorot-uniform weights in (-r, r), r = sqrt(6 / (in + out)); zero bias.
DenseLayer make_dense(std::size_t in_dim, std::size_t out_dim, Activation activation,
                      Rng& rng);

// Stack of layers with widths dims[0] -> dims[1] -> ... Hidden layers use
// `hidden`, the last layer uses `output`.
std::vector<DenseLayer> make_mlp(std::span<const std::size_t> dims, Activation hidden,
                                 Activation output, Rng& rng);

// activations[0] is the input; activations[i + 1] is the output of layer i.
std::vector<Matrix> forward(std::span<const DenseLayer> layers, const Matrix& input);

struct LayerGradient {
  Matrix weights;
  Matrix bias;
};

struct BackwardResult {
  std::vector<LayerGradient> layers;
  Matrix input_grad;
};

// upstream_grad is dLoss/d(last activation). Gradients are overwritten.
BackwardResult backward(std::span<const DenseLayer> layers,
                        std::span<const Matrix> activations, const Matrix& upstream_grad);

double sigmoid(double x) noexcept;

}  // namespace jdrec::nn
