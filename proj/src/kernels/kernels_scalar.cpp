#include "prune24/kernels.hpp"

namespace prune24::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void row_times_matrix(const double* x, const double* m, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* mi = m + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += xi * mi[j];
  }
}

void gradient_step(double* w, const double* wh, const double* target, double step, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) w[i] -= step * (wh[i] - target[i]);
}

void masked_gradient_step(double* w, const double* wh, const double* target, const std::uint8_t* keep,
                          double step, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) w[i] -= step * (wh[i] - target[i]);
  }
}

void subtract(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void scale_by(double* x, const double* s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::scalar, "scalar", dot, axpy, row_times_matrix, gradient_step,
                                 masked_gradient_step, subtract, scale_by};
  return table;
}

}  // namespace prune24::kernels
