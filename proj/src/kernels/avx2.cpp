#include "variants.hpp"

#if defined(__x86_64__) && defined(JDREC_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

namespace jdrec::kernels::detail {

namespace {

// Lane-parallel across output columns; the k-loop order matches the scalar
// reference, and mul/add are kept separate (no FMA) so results are identical.

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256d c0, c1, c2, c3;
      if (accumulate) {
        c0 = _mm256_loadu_pd(crow + j);
        c1 = _mm256_loadu_pd(crow + j + 4);
        c2 = _mm256_loadu_pd(crow + j + 8);
        c3 = _mm256_loadu_pd(crow + j + 12);
      } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(arow[p]);
        const double* brow = b + p * n + j;
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(brow)));
        c1 = _mm256_add_pd(c1, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 4)));
        c2 = _mm256_add_pd(c2, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 8)));
        c3 = _mm256_add_pd(c3, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 12)));
      }
      _mm256_storeu_pd(crow + j, c0);
      _mm256_storeu_pd(crow + j + 4, c1);
      _mm256_storeu_pd(crow + j + 8, c2);
      _mm256_storeu_pd(crow + j + 12, c3);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(arow[p]);
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(b + p * n + j)));
      }
      _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc = acc + arow[p] * b[p * n + j];
      crow[j] = acc;
    }
  }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
             const double* b, double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    double* crow = c + p * n;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      __m256d c1 = _mm256_loadu_pd(crow + j + 4);
      for (std::size_t i = 0; i < m; ++i) {
        const __m256d av = _mm256_set1_pd(a[i * k + p]);
        const double* brow = b + i * n + j;
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(brow)));
        c1 = _mm256_add_pd(c1, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 4)));
      }
      _mm256_storeu_pd(crow + j, c0);
      _mm256_storeu_pd(crow + j + 4, c1);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d c0 = _mm256_loadu_pd(crow + j);
      for (std::size_t i = 0; i < m; ++i) {
        const __m256d av = _mm256_set1_pd(a[i * k + p]);
        c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(b + i * n + j)));
      }
      _mm256_storeu_pd(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = crow[j];
      for (std::size_t i = 0; i < m; ++i) acc = acc + a[i * k + p] * b[i * n + j];
      crow[j] = acc;
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void relu(std::size_t n, double* x) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask(std::size_t n, const double* out, double* grad) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(out + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(grad + i, _mm256_and_pd(keep, _mm256_loadu_pd(grad + i)));
  }
  for (; i < n; ++i) grad[i] = out[i] > 0.0 ? grad[i] : 0.0;
}

void adagrad(std::size_t n, double* param, const double* grad, double* accum,
             double lr, double eps) {
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d acc = _mm256_loadu_pd(accum + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(g, g));
    _mm256_storeu_pd(accum + i, acc);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lrv, g), _mm256_sqrt_pd(_mm256_add_pd(acc, epsv)));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    accum[i] = accum[i] + grad[i] * grad[i];
    param[i] = param[i] - (lr * grad[i]) / std::sqrt(accum[i] + eps);
  }
}

void column_max(std::size_t m, std::size_t n, const double* a, double* out_max,
                std::uint32_t* out_argmax) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d mx = _mm256_loadu_pd(a + j);
    __m256i arg = _mm256_setzero_si256();
    for (std::size_t i = 1; i < m; ++i) {
      const __m256d v = _mm256_loadu_pd(a + i * n + j);
      const __m256d gt = _mm256_cmp_pd(v, mx, _CMP_GT_OQ);
      mx = _mm256_blendv_pd(mx, v, gt);
      arg = _mm256_blendv_epi8(arg, _mm256_set1_epi64x(static_cast<long long>(i)),
                               _mm256_castpd_si256(gt));
    }
    _mm256_storeu_pd(out_max + j, mx);
    alignas(32) long long lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), arg);
    for (int l = 0; l < 4; ++l) out_argmax[j + l] = static_cast<std::uint32_t>(lanes[l]);
  }
  for (; j < n; ++j) {
    out_max[j] = a[j];
    out_argmax[j] = 0;
    for (std::size_t i = 1; i < m; ++i) {
      if (a[i * n + j] > out_max[j]) {
        out_max[j] = a[i * n + j];
        out_argmax[j] = static_cast<std::uint32_t>(i);
      }
    }
  }
}

constexpr KernelTable kAvx2{
    "avx2", gemm, gemm_tn, axpy, relu, relu_mask, adagrad, column_max,
};

}  // namespace

const KernelTable* avx2_table() noexcept {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") ? &kAvx2 : nullptr;
}

}  // namespace jdrec::kernels::detail

#else

namespace jdrec::kernels::detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace jdrec::kernels::detail

#endif
