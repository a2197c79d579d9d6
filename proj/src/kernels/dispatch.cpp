#include <atomic>
#include <cstdlib>
#include <string_view>

#include "jdrec/kernels/kernels.hpp"
#include "variants.hpp"

namespace jdrec::kernels {

namespace {

const KernelTable* widest() noexcept {
  if (const KernelTable* t = detail::avx2_table()) return t;
  if (const KernelTable* t = detail::neon_table()) return t;
  return &scalar_kernels();
}

const KernelTable* by_name(std::string_view name) noexcept {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") return detail::avx2_table();
  if (name == "neon") return detail::neon_table();
  return nullptr;
}

const KernelTable* initial() noexcept {
  if (const char* env = std::getenv("JDREC_SIMD")) {
    if (const KernelTable* t = by_name(env)) return t;
  }
  return widest();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{initial()};
  return table;
}

}  // namespace

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
  if (const KernelTable* t = detail::avx2_table()) out.push_back(t);
  if (const KernelTable* t = detail::neon_table()) out.push_back(t);
  return out;
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  const KernelTable* t = by_name(name);
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace jdrec::kernels
