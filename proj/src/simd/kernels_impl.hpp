#pragma once

#include <cstddef>

// Per-ISA entry points; each namespace mirrors the KernelTable signatures.

#define UAR_DECLARE_KERNELS                                                                            \
  double dot_f64(const double* a, const double* b, std::size_t n);                                     \
  double dot_f64_f32(const double* w, const float* x, std::size_t n);                                  \
  double dot_f32(const float* a, const float* b, std::size_t n);                                       \
  double sumsq_f32(const float* x, std::size_t n);                                                     \
  void axpy_f64_f32(double a, const float* x, double* y, std::size_t n);                               \
  void standardize_f32(const float* x, const double* mean, const double* inv_scale, float* out,        \
                       std::size_t n);                                                                 \
  void cdiv_reg(const double* num, const double* den, double eps, double* out, std::size_t n);         \
  void cabs(const double* z, double* out, std::size_t n);

namespace uar::simd::scalar {
UAR_DECLARE_KERNELS
}

#if defined(UAR_HAVE_AVX2)
namespace uar::simd::avx2 {
UAR_DECLARE_KERNELS
}
#endif

#if defined(UAR_HAVE_NEON)
namespace uar::simd::neon {
UAR_DECLARE_KERNELS
}
#endif

#undef UAR_DECLARE_KERNELS
