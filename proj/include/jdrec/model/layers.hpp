#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "jdrec/nn/dense.hpp"
#include "jdrec/nn/parameters.hpp"

namespace jdrec::model {

void append_layer_parameters(std::vector<nn::ParamRef>& out, std::vector<nn::DenseLayer>& layers,
                             const std::string& prefix);

// Writes layer gradients into grads starting at `offset` (parameter order:
// weights then bias per layer). Returns the next offset.
std::size_t accumulate_layer_gradients(nn::Gradients& grads, std::size_t offset,
                                       const std::vector<nn::LayerGradient>& layer_grads);

void zero_layer(nn::DenseLayer& layer);

nlohmann::json widths_to_json(std::span<const std::size_t> widths);

}  // namespace jdrec::model
