// aarch64 only. NEON is mandatory on that target, so no runtime check is needed.

#include <arm_neon.h>

#include "prune24/kernels.hpp"

namespace prune24::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void row_times_matrix(const double* x, const double* m, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] == 0.0) continue;
    axpy(x[i], m + i * n, y, n);
  }
}

void gradient_step(double* w, const double* wh, const double* target, double step, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(step);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t diff = vsubq_f64(vld1q_f64(wh + i), vld1q_f64(target + i));
    vst1q_f64(w + i, vfmsq_f64(vld1q_f64(w + i), vs, diff));
  }
  for (; i < n; ++i) w[i] -= step * (wh[i] - target[i]);
}

void masked_gradient_step(double* w, const double* wh, const double* target, const std::uint8_t* keep,
                          double step, std::size_t n) {
  const float64x2_t vs = vdupq_n_f64(step);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const double k[2] = {keep[i] ? 1.0 : 0.0, keep[i + 1] ? 1.0 : 0.0};
    float64x2_t diff = vmulq_f64(vsubq_f64(vld1q_f64(wh + i), vld1q_f64(target + i)), vld1q_f64(k));
    vst1q_f64(w + i, vfmsq_f64(vld1q_f64(w + i), vs, diff));
  }
  for (; i < n; ++i) {
    if (keep[i]) w[i] -= step * (wh[i] - target[i]);
  }
}

void subtract(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void scale_by(double* x, const double* s, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(s + i)));
  for (; i < n; ++i) x[i] *= s[i];
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Isa::neon, "neon", dot, axpy, row_times_matrix, gradient_step,
                                 masked_gradient_step, subtract, scale_by};
  return table;
}

}  // namespace prune24::kernels
