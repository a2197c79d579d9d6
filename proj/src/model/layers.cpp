#include "jdrec/model/layers.hpp"

#include "jdrec/core/error.hpp"
#include "jdrec/kernels/kernels.hpp"

namespace jdrec::model {

void append_layer_parameters(std::vector<nn::ParamRef>& out, std::vector<nn::DenseLayer>& layers,
                             const std::string& prefix) {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string base = prefix + std::to_string(i);
    out.push_back({base + "/weights", &layers[i].weights});
    out.push_back({base + "/bias", &layers[i].bias});
  }
}

std::size_t accumulate_layer_gradients(nn::Gradients& grads, std::size_t offset,
                                       const std::vector<nn::LayerGradient>& layer_grads) {
  const auto& k = kernels::active();
  for (const auto& lg : layer_grads) {
    if (offset + 1 >= grads.size() || !grads[offset].same_shape(lg.weights) ||
        !grads[offset + 1].same_shape(lg.bias)) {
      throw ConfigError("layer gradient does not match parameter layout");
    }
    k.axpy(lg.weights.size(), 1.0, lg.weights.data(), grads[offset].data());
    k.axpy(lg.bias.size(), 1.0, lg.bias.data(), grads[offset + 1].data());
    offset += 2;
  }
  return offset;
}

void zero_layer(nn::DenseLayer& layer) {
  layer.weights.fill(0.0);
  layer.bias.fill(0.0);
}

nlohmann::json widths_to_json(std::span<const std::size_t> widths) {
  return nlohmann::json(std::vector<std::size_t>(widths.begin(), widths.end()));
}

}  // namespace jdrec::model
