#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jdrec/nn/matrix.hpp"

namespace jdrec::nn {

struct ParamRef {
  std::string name;
  Matrix* value;
};

// One gradient matrix per parameter, in parameter order.
using Gradients = std::vector<Matrix>;

Gradients zero_gradients(std::span<const ParamRef> params);
void add_gradients(Gradients& into, const Gradients& other);

// FNV-1a over the raw parameter bytes; used to assert a model stayed frozen.
std::uint64_t parameter_checksum(std::span<const ParamRef> params);

}  // namespace jdrec::nn
