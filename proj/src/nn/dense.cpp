#include "jdrec/nn/dense.hpp"

#include <cmath>

#include "jdrec/core/error.hpp"
#include "jdrec/kernels/kernels.hpp"

namespace jdrec::nn {

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + name + "'");
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseLayer make_dense(std::size_t in_dim, std::size_t out_dim, Activation activation,
                      Rng& rng) {
  DenseLayer layer{Matrix(in_dim, out_dim), Matrix(1, out_dim), activation};
  const double r = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (double& w : layer.weights.values()) w = rng.uniform(-r, r);
  return layer;
}

std::vector<DenseLayer> make_mlp(std::span<const std::size_t> dims, Activation hidden,
                                 Activation output, Rng& rng) {
  if (dims.size() < 2) throw ConfigError("mlp needs at least input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    layers.push_back(make_dense(dims[i], dims[i + 1], last ? output : hidden, rng));
  }
  return layers;
}

namespace {

void apply_activation(Activation a, Matrix& m) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: kernels::active().relu(m.size(), m.data()); break;
    case Activation::sigmoid:
      for (double& x : m.values()) x = sigmoid(x);
      break;
  }
}

// grad <- grad * act'(pre) expressed through the activation output.
void activation_backward(Activation a, const Matrix& out, Matrix& grad) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: kernels::active().relu_mask(out.size(), out.data(), grad.data()); break;
    case Activation::sigmoid: {
      auto o = out.values();
      auto g = grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] * (o[i] * (1.0 - o[i]));
      break;
    }
  }
}

void check_layer(const DenseLayer& layer, std::size_t index) {
  if (layer.bias.rows() != 1 || layer.bias.cols() != layer.weights.cols()) {
    throw ConfigError("layer " + std::to_string(index) + ": bias length " +
                      std::to_string(layer.bias.size()) + " != weights.cols " +
                      std::to_string(layer.weights.cols()));
  }
}

}  // namespace

std::vector<Matrix> forward(std::span<const DenseLayer> layers, const Matrix& input) {
  std::vector<Matrix> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(input);
  const auto& k = kernels::active();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const DenseLayer& layer = layers[li];
    check_layer(layer, li);
    const Matrix& x = acts.back();
    if (x.cols() != layer.in_dim()) {
      throw ConfigError("forward: layer " + std::to_string(li) + " expects " +
                        std::to_string(layer.in_dim()) + " inputs, got " +
                        std::to_string(x.cols()));
    }
    Matrix y(x.rows(), layer.out_dim());
    k.gemm(x.rows(), x.cols(), y.cols(), x.data(), layer.weights.data(), y.data(), false);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      k.axpy(y.cols(), 1.0, layer.bias.data(), y.row(r).data());
    }
    apply_activation(layer.activation, y);
    acts.push_back(std::move(y));
  }
  return acts;
}

BackwardResult backward(std::span<const DenseLayer> layers,
                        std::span<const Matrix> activations, const Matrix& upstream_grad) {
  if (activations.size() != layers.size() + 1) {
    throw ConfigError("backward: expected " + std::to_string(layers.size() + 1) +
                      " activations, got " + std::to_string(activations.size()));
  }
  if (!upstream_grad.same_shape(activations.back())) {
    throw ConfigError("backward: upstream gradient shape mismatch");
  }
  const auto& k = kernels::active();
  BackwardResult result;
  result.layers.resize(layers.size());
  Matrix grad = upstream_grad;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const DenseLayer& layer = layers[li];
    check_layer(layer, li);
    const Matrix& x = activations[li];
    const Matrix& y = activations[li + 1];
    if (x.cols() != layer.in_dim() || y.cols() != layer.out_dim() || x.rows() != y.rows()) {
      throw ConfigError("backward: activation shapes do not match layer " +
                        std::to_string(li));
    }
    activation_backward(layer.activation, y, grad);

    LayerGradient& lg = result.layers[li];
    lg.weights = Matrix(layer.in_dim(), layer.out_dim());
    k.gemm_tn(x.rows(), x.cols(), grad.cols(), x.data(), grad.data(), lg.weights.data());
    lg.bias = Matrix(1, layer.out_dim());
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      k.axpy(grad.cols(), 1.0, grad.row(r).data(), lg.bias.data());
    }

    Matrix next(x.rows(), x.cols());
    const Matrix wt = layer.weights.transposed();
    k.gemm(grad.rows(), grad.cols(), wt.cols(), grad.data(), wt.data(), next.data(), false);
    grad = std::move(next);
  }
  result.input_grad = std::move(grad);
  return result;
}

}  // namespace jdrec::nn
