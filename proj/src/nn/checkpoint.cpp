#include "jdrec/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "jdrec/core/error.hpp"

namespace jdrec::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'J', 'D', 'R', 'E', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("checkpoint " + path.string() + ": truncated");
  return v;
}

std::string get_string(std::istream& in, std::uint64_t len, const std::filesystem::path& path) {
  if (len > (1ULL << 32)) throw DataError("checkpoint " + path.string() + ": bad string length");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("checkpoint " + path.string() + ": truncated");
  return s;
}

}  // namespace

const Matrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw DataError("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.first == name) return true;
  }
  return false;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, Checkpoint::kFormatVersion);
  put<std::uint64_t>(out, ckpt.metadata.size());
  out.write(ckpt.metadata.data(), static_cast<std::streamsize>(ckpt.metadata.size()));
  put<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& [name, m] : ckpt.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint64_t>(out, m.rows());
    put<std::uint64_t>(out, m.cols());
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError(path.string() + " is not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != Checkpoint::kFormatVersion) {
    throw DataError("checkpoint " + path.string() + ": unsupported version " +
                    std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.metadata = get_string(in, get<std::uint64_t>(in, path), path);
  const auto count = get<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = get_string(in, get<std::uint32_t>(in, path), path);
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (rows * cols > (1ULL << 32)) throw DataError("checkpoint tensor too large: " + name);
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint " + path.string() + ": truncated tensor " + name);
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  return ckpt;
}

void store_parameters(Checkpoint& ckpt, std::span<const ParamRef> params,
                      const AdaGradState* optimizer) {
  for (const ParamRef& p : params) ckpt.tensors.emplace_back(p.name, *p.value);
  if (optimizer == nullptr) return;
  if (optimizer->accumulators.size() != params.size()) {
    throw ConfigError("optimizer state does not match parameter count");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.tensors.emplace_back("adagrad/" + params[i].name, optimizer->accumulators[i]);
  }
}

void restore_parameters(const Checkpoint& ckpt, std::span<const ParamRef> params,
                        AdaGradState* optimizer) {
  for (const ParamRef& p : params) {
    const Matrix& m = ckpt.tensor(p.name);
    if (!m.same_shape(*p.value)) {
      throw DataError("checkpoint tensor '" + p.name + "' has shape " + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ", model expects " +
                      std::to_string(p.value->rows()) + "x" + std::to_string(p.value->cols()));
    }
    *p.value = m;
  }
  if (optimizer == nullptr) return;
  optimizer->accumulators.clear();
  for (const ParamRef& p : params) {
    const std::string name = "adagrad/" + p.name;
    optimizer->accumulators.push_back(ckpt.has_tensor(name) ? ckpt.tensor(name)
                                                            : Matrix(p.value->rows(), p.value->cols()));
  }
}

}  // namespace jdrec::nn
