#pragma once

// Dense arithmetic kernels used by the network substrate.
//
// Every kernel has a scalar reference and optional SIMD variants. Variants
// vectorize across independent output elements and never reorder a
// reduction, so all variants produce bit-identical results. Matrices are
// row-major and densely packed.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace jdrec::kernels {

struct KernelTable {
  const char* name;

  // c[m x n] = a[m x k] * b[k x n]; when accumulate is set, c += a * b.
  void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a,
               const double* b, double* c, bool accumulate);

  // c[k x n] += transpose(a[m x k]) * b[m x n].
  void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                  const double* b, double* c);

  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);

  // x = max(x, 0)
  void (*relu)(std::size_t n, double* x);

  // grad = out > 0 ? grad : 0
  void (*relu_mask)(std::size_t n, const double* out, double* grad);

  // accum += grad^2; param -= lr * grad / sqrt(accum + eps)
  void (*adagrad)(std::size_t n, double* param, const double* grad,
                  double* accum, double lr, double eps);

  // Per-column maximum over rows of a[m x n]; ties keep the lowest row.
  void (*column_max)(std::size_t m, std::size_t n, const double* a,
                     double* out_max, std::uint32_t* out_argmax);
};

const KernelTable& scalar_kernels() noexcept;

// SIMD tables compiled into this build and supported by the running CPU.
std::vector<const KernelTable*> available_kernels();

// Table chosen at first use: JDREC_SIMD=<name> if set and available,
// otherwise the widest supported variant.
const KernelTable& active() noexcept;

// Overrides the active table (tests, benchmarks). Returns false if the
// requested variant is unavailable.
bool select(std::string_view name);

}  // namespace jdrec::kernels
