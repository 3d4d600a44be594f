#pragma once

// Data-parallel inner loops used by the DSP and classifier code. Each kernel
// has a scalar reference implementation and, where the target has one, a
// vector variant. The active table is chosen once at startup from CPUID and
// can be pinned with UAR_SIMD=scalar|avx2|neon.

#include <cstddef>
#include <string_view>
#include <vector>

namespace uar::simd {

struct KernelTable {
  std::string_view isa;

  // sum a[i] * b[i]
  double (*dot_f64)(const double* a, const double* b, std::size_t n);
  // sum w[i] * x[i], accumulated in double
  double (*dot_f64_f32)(const double* w, const float* x, std::size_t n);
  // sum a[i] * b[i] over floats, accumulated in double
  double (*dot_f32)(const float* a, const float* b, std::size_t n);
  // sum x[i]^2, accumulated in double
  double (*sumsq_f32)(const float* x, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy_f64_f32)(double a, const float* x, double* y, std::size_t n);
  // out[i] = float((x[i] - mean[i]) * inv_scale[i])
  void (*standardize_f32)(const float* x, const double* mean, const double* inv_scale, float* out,
                          std::size_t n);
  // Interleaved complex (re, im) arrays of n bins:
  // out[k] = num[k] * conj(den[k]) / (|den[k]|^2 + eps)
  void (*cdiv_reg)(const double* num, const double* den, double eps, double* out, std::size_t n);
  // out[k] = |z[k]| for n interleaved complex bins
  void (*cabs)(const double* z, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Every table usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

// The dispatched table; selected on first call.
const KernelTable& kernels();

}  // namespace uar::simd
