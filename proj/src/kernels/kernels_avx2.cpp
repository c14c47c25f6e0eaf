// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include <immintrin.h>

#include "prune24/kernels.hpp"

namespace prune24::kernels {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void row_times_matrix(const double* x, const double* m, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    axpy(xi, m + i * n, y, n);
  }
}

void gradient_step(double* w, const double* wh, const double* target, double step, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(step);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(wh + i), _mm256_loadu_pd(target + i));
    _mm256_storeu_pd(w + i, _mm256_fnmadd_pd(vs, diff, _mm256_loadu_pd(w + i)));
  }
  for (; i < n; ++i) w[i] -= step * (wh[i] - target[i]);
}

void masked_gradient_step(double* w, const double* wh, const double* target, const std::uint8_t* keep,
                          double step, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(step);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d k = _mm256_set_pd(keep[i + 3] ? 1.0 : 0.0, keep[i + 2] ? 1.0 : 0.0, keep[i + 1] ? 1.0 : 0.0,
                                    keep[i] ? 1.0 : 0.0);
    const __m256d sel = _mm256_cmp_pd(k, zero, _CMP_NEQ_OQ);
    __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(wh + i), _mm256_loadu_pd(target + i));
    diff = _mm256_and_pd(diff, sel);
    _mm256_storeu_pd(w + i, _mm256_fnmadd_pd(vs, diff, _mm256_loadu_pd(w + i)));
  }
  for (; i < n; ++i) {
    if (keep[i]) w[i] -= step * (wh[i] - target[i]);
  }
}

void subtract(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void scale_by(double* x, const double* s, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(s + i)));
  }
  for (; i < n; ++i) x[i] *= s[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, "avx2", dot, axpy, row_times_matrix, gradient_step,
                                 masked_gradient_step, subtract, scale_by};
  return table;
}

}  // namespace prune24::kernels
