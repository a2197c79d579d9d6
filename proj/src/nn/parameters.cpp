#include "jdrec/nn/parameters.hpp"

#include <cstring>

#include "jdrec/core/error.hpp"
#include "jdrec/kernels/kernels.hpp"

namespace jdrec::nn {

Gradients zero_gradients(std::span<const ParamRef> params) {
  Gradients g;
  g.reserve(params.size());
  for (const ParamRef& p : params) g.emplace_back(p.value->rows(), p.value->cols());
  return g;
}

void add_gradients(Gradients& into, const Gradients& other) {
  if (into.size() != other.size()) throw ConfigError("gradient lists differ in length");
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < into.size(); ++i) {
    if (!into[i].same_shape(other[i])) throw ConfigError("gradient shapes differ");
    k.axpy(into[i].size(), 1.0, other[i].data(), into[i].data());
  }
}

std::uint64_t parameter_checksum(std::span<const ParamRef> params) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const ParamRef& p : params) {
    for (double v : p.value->values()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFFu;
        h *= 0x100000001B3ULL;
      }
    }
  }
  return h;
}

}  // namespace jdrec::nn
