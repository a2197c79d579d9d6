#include "variants.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace jdrec::kernels::detail {

namespace {

// Two-lane doubles. vmulq/vaddq are used instead of vfmaq to keep rounding
// identical to the scalar reference.

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a,
          const double* b, double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t c0 = accumulate ? vld1q_f64(crow + j) : vdupq_n_f64(0.0);
      float64x2_t c1 = accumulate ? vld1q_f64(crow + j + 2) : vdupq_n_f64(0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t av = vdupq_n_f64(arow[p]);
        const double* brow = b + p * n + j;
        c0 = vaddq_f64(c0, vmulq_f64(av, vld1q_f64(brow)));
        c1 = vaddq_f64(c1, vmulq_f64(av, vld1q_f64(brow + 2)));
      }
      vst1q_f64(crow + j, c0);
      vst1q_f64(crow + j + 2, c1);
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
    for (; j + 2 <= n; j += 2) {
      float64x2_t c0 = vld1q_f64(crow + j);
      for (std::size_t i = 0; i < m; ++i) {
        const float64x2_t av = vdupq_n_f64(a[i * k + p]);
        c0 = vaddq_f64(c0, vmulq_f64(av, vld1q_f64(b + i * n + j)));
      }
      vst1q_f64(crow + j, c0);
    }
    for (; j < n; ++j) {
      double acc = crow[j];
      for (std::size_t i = 0; i < m; ++i) acc = acc + a[i * k + p] * b[i * n + j];
      crow[j] = acc;
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void relu(std::size_t n, double* x) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    vst1q_f64(x + i, vbslq_f64(vcgtq_f64(v, zero), v, zero));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask(std::size_t n, const double* out, double* grad) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t keep = vcgtq_f64(vld1q_f64(out + i), zero);
    vst1q_f64(grad + i, vbslq_f64(keep, vld1q_f64(grad + i), zero));
  }
  for (; i < n; ++i) grad[i] = out[i] > 0.0 ? grad[i] : 0.0;
}

void adagrad(std::size_t n, double* param, const double* grad, double* accum,
             double lr, double eps) {
  const float64x2_t lrv = vdupq_n_f64(lr);
  const float64x2_t epsv = vdupq_n_f64(eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    const float64x2_t acc = vaddq_f64(vld1q_f64(accum + i), vmulq_f64(g, g));
    vst1q_f64(accum + i, acc);
    const float64x2_t step =
        vdivq_f64(vmulq_f64(lrv, g), vsqrtq_f64(vaddq_f64(acc, epsv)));
    vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
  }
  for (; i < n; ++i) {
    accum[i] = accum[i] + grad[i] * grad[i];
    param[i] = param[i] - (lr * grad[i]) / std::sqrt(accum[i] + eps);
  }
}

void column_max(std::size_t m, std::size_t n, const double* a, double* out_max,
                std::uint32_t* out_argmax) {
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t mx = vld1q_f64(a + j);
    uint64x2_t arg = vdupq_n_u64(0);
    for (std::size_t i = 1; i < m; ++i) {
      const float64x2_t v = vld1q_f64(a + i * n + j);
      const uint64x2_t gt = vcgtq_f64(v, mx);
      mx = vbslq_f64(gt, v, mx);
      arg = vbslq_u64(gt, vdupq_n_u64(i), arg);
    }
    vst1q_f64(out_max + j, mx);
    out_argmax[j] = static_cast<std::uint32_t>(vgetq_lane_u64(arg, 0));
    out_argmax[j + 1] = static_cast<std::uint32_t>(vgetq_lane_u64(arg, 1));
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

constexpr KernelTable kNeon{
    "neon", gemm, gemm_tn, axpy, relu, relu_mask, adagrad, column_max,
};

}  // namespace

const KernelTable* neon_table() noexcept { return &kNeon; }

}  // namespace jdrec::kernels::detail

#else

namespace jdrec::kernels::detail {
const KernelTable* neon_table() noexcept { return nullptr; }
}  // namespace jdrec::kernels::detail

#endif
