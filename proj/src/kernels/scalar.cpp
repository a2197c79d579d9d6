#include <cmath>

#include "jdrec/kernels/kernels.hpp"

namespace jdrec::kernels {

namespace {

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + aip * brow[j];
    }
  }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + aip * brow[j];
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void relu(std::size_t n, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask(std::size_t n, const double* out, double* grad) {
  for (std::size_t i = 0; i < n; ++i) grad[i] = out[i] > 0.0 ? grad[i] : 0.0;
}

void adagrad(std::size_t n, double* param, const double* grad, double* accum,
             double lr, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    accum[i] = accum[i] + grad[i] * grad[i];
    param[i] = param[i] - (lr * grad[i]) / std::sqrt(accum[i] + eps);
  }
}

void column_max(std::size_t m, std::size_t n, const double* a, double* out_max,
                std::uint32_t* out_argmax) {
  for (std::size_t j = 0; j < n; ++j) {
    out_max[j] = a[j];
    out_argmax[j] = 0;
  }
  for (std::size_t i = 1; i < m; ++i) {
    const double* row = a + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] > out_max[j]) {
        out_max[j] = row[j];
        out_argmax[j] = static_cast<std::uint32_t>(i);
      }
    }
  }
}

constexpr KernelTable kScalar{
    "scalar", gemm, gemm_tn, axpy, relu, relu_mask, adagrad, column_max,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace jdrec::kernels
