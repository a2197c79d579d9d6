#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "jdrec/nn/adagrad.hpp"
#include "jdrec/nn/matrix.hpp"
#include "jdrec/nn/parameters.hpp"

namespace jdrec::nn {

// Binary container: magic, format version, a JSON metadata blob (model kind,
// architecture, schema, optimizer settings) and named float64 tensors.
// Values are stored as raw IEEE-754 little-endian bytes, so a save/load
// round trip is bit-exact.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::string metadata;  // JSON text
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Stores parameters under their names and, when given, AdaGrad accumulators
// under "adagrad/<name>".
void store_parameters(Checkpoint& ckpt, std::span<const ParamRef> params,
                      const AdaGradState* optimizer);

// Copies tensors back into already-shaped parameters. Accumulators are
// restored when `optimizer` is non-null and the checkpoint has them.
void restore_parameters(const Checkpoint& ckpt, std::span<const ParamRef> params,
                        AdaGradState* optimizer);

}  // namespace jdrec::nn
