#pragma once

// Inner-loop kernels for the dense layerwise arithmetic.
//
// Every kernel has a scalar reference implementation. SIMD variants (AVX2+FMA on
// x86-64, NEON on aarch64) are compiled into separate translation units and
// selected once at runtime. Within one ISA the reduction order is fixed, so
// results are reproducible run to run; across ISAs they agree to rounding.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace prune24::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  const char* name;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// y = x^T M for a row-major n x n matrix M; y is overwritten.
  void (*row_times_matrix)(const double* x, const double* m, double* y, std::size_t n);
  /// w[i] -= step * (wh[i] - target[i])
  void (*gradient_step)(double* w, const double* wh, const double* target, double step, std::size_t n);
  /// Same as gradient_step but only where keep[i] != 0; other entries are left untouched.
  void (*masked_gradient_step)(double* w, const double* wh, const double* target, const std::uint8_t* keep,
                               double step, std::size_t n);
  /// out[i] = a[i] - b[i]
  void (*subtract)(const double* a, const double* b, double* out, std::size_t n);
  /// x[i] *= s[i]
  void (*scale_by)(double* x, const double* s, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(PRUNE24_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(PRUNE24_HAVE_NEON)
const KernelTable& neon_table();
#endif

/// True if the ISA was compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// The table currently in use. Picks the best available ISA on first call, unless
/// the PRUNE24_KERNELS environment variable names one (scalar, avx2, neon).
const KernelTable& active();

/// Force a specific ISA. Throws std::invalid_argument if it is not available.
void select(Isa isa);

const KernelTable& table_for(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace prune24::kernels
