// Compiled with -mavx2 -mfma -ffp-contract=off; only reached after a CPUID check.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace uar::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d load_f32_as_f64(const float* p) { return _mm256_cvtps_pd(_mm_loadu_ps(p)); }

}  // namespace

double dot_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_f64_f32(const double* w, const float* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), load_f32_as_f64(x + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 4), load_f32_as_f64(x + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 8), load_f32_as_f64(x + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 12), load_f32_as_f64(x + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), load_f32_as_f64(x + i), acc0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += w[i] * static_cast<double>(x[i]);
  return s;
}

double dot_f32(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(load_f32_as_f64(a + i), load_f32_as_f64(b + i), acc0);
    acc1 = _mm256_fmadd_pd(load_f32_as_f64(a + i + 4), load_f32_as_f64(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(load_f32_as_f64(a + i + 8), load_f32_as_f64(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(load_f32_as_f64(a + i + 12), load_f32_as_f64(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(load_f32_as_f64(a + i), load_f32_as_f64(b + i), acc0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

double sumsq_f32(const float* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = load_f32_as_f64(x + i);
    const __m256d b = load_f32_as_f64(x + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double v = x[i];
    s += v * v;
  }
  return s;
}

void axpy_f64_f32(double a, const float* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, load_f32_as_f64(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, load_f32_as_f64(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i < n; ++i) y[i] += a * static_cast<double>(x[i]);
}

void standardize_f32(const float* x, const double* mean, const double* inv_scale, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d centered = _mm256_sub_pd(load_f32_as_f64(x + i), _mm256_loadu_pd(mean + i));
    _mm_storeu_ps(out + i, _mm256_cvtpd_ps(_mm256_mul_pd(centered, _mm256_loadu_pd(inv_scale + i))));
  }
  for (; i < n; ++i) out[i] = static_cast<float>((static_cast<double>(x[i]) - mean[i]) * inv_scale[i]);
}

// Same operation order as the scalar kernel, so results are bit-identical.
void cdiv_reg(const double* num, const double* den, double eps, double* out, std::size_t n) {
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d a = _mm256_loadu_pd(num + 2 * k);  // nr0 ni0 nr1 ni1
    const __m256d d = _mm256_loadu_pd(den + 2 * k);  // dr0 di0 dr1 di1
    const __m256d mag = _mm256_hadd_pd(_mm256_mul_pd(d, d), _mm256_mul_pd(d, d));
    const __m256d inv = _mm256_div_pd(one, _mm256_add_pd(mag, veps));
    const __m256d re = _mm256_hadd_pd(_mm256_mul_pd(a, d), _mm256_mul_pd(a, d));
    const __m256d dswap = _mm256_permute_pd(d, 0b0101);
    const __m256d cross = _mm256_mul_pd(a, dswap);                     // nr*di ni*dr ...
    const __m256d neg_im = _mm256_hsub_pd(cross, cross);              // nr*di - ni*dr
    const __m256d im = _mm256_sub_pd(_mm256_setzero_pd(), neg_im);
    _mm256_storeu_pd(out + 2 * k, _mm256_mul_pd(_mm256_blend_pd(re, im, 0b1010), inv));
  }
  for (; k < n; ++k) {
    const double nr = num[2 * k], ni = num[2 * k + 1];
    const double dr = den[2 * k], di = den[2 * k + 1];
    const double inv = 1.0 / (dr * dr + di * di + eps);
    out[2 * k] = (nr * dr + ni * di) * inv;
    out[2 * k + 1] = (ni * dr - nr * di) * inv;
  }
}

void cabs(const double* z, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d a = _mm256_loadu_pd(z + 2 * k);
    const __m256d b = _mm256_loadu_pd(z + 2 * k + 4);
    const __m256d m = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));  // m0 m2 m1 m3
    _mm256_storeu_pd(out + k, _mm256_sqrt_pd(_mm256_permute4x64_pd(m, 0b11011000)));
  }
  for (; k < n; ++k) out[k] = __builtin_sqrt(z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1]);
}

}  // namespace uar::simd::avx2
