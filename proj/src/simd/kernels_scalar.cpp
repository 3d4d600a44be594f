#include <cmath>

#include "kernels_impl.hpp"

namespace uar::simd::scalar {

double dot_f64(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_f64_f32(const double* w, const float* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * static_cast<double>(x[i]);
  return s;
}

double dot_f32(const float* a, const float* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

double sumsq_f32(const float* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    s += v * v;
  }
  return s;
}

void axpy_f64_f32(double a, const float* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * static_cast<double>(x[i]);
}

void standardize_f32(const float* x, const double* mean, const double* inv_scale, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>((static_cast<double>(x[i]) - mean[i]) * inv_scale[i]);
}

void cdiv_reg(const double* num, const double* den, double eps, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double nr = num[2 * k], ni = num[2 * k + 1];
    const double dr = den[2 * k], di = den[2 * k + 1];
    const double inv = 1.0 / (dr * dr + di * di + eps);
    out[2 * k] = (nr * dr + ni * di) * inv;
    out[2 * k + 1] = (ni * dr - nr * di) * inv;
  }
}

void cabs(const double* z, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = std::sqrt(z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1]);
}

}  // namespace uar::simd::scalar
