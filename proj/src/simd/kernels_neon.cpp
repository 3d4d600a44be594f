#include <arm_neon.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace uar::simd::neon {

double dot_f64(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_f64_f32(const double* w, const float* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t xv = vld1q_f32(x + i);
    acc0 = vfmaq_f64(acc0, vld1q_f64(w + i), vcvt_f64_f32(vget_low_f32(xv)));
    acc1 = vfmaq_f64(acc1, vld1q_f64(w + i + 2), vcvt_high_f64_f32(xv));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += w[i] * static_cast<double>(x[i]);
  return s;
}

double dot_f32(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t av = vld1q_f32(a + i);
    const float32x4_t bv = vld1q_f32(b + i);
    acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(av)), vcvt_f64_f32(vget_low_f32(bv)));
    acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(av), vcvt_high_f64_f32(bv));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

double sumsq_f32(const float* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t xv = vld1q_f32(x + i);
    const float64x2_t lo = vcvt_f64_f32(vget_low_f32(xv));
    const float64x2_t hi = vcvt_high_f64_f32(xv);
    acc0 = vfmaq_f64(acc0, lo, lo);
    acc1 = vfmaq_f64(acc1, hi, hi);
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double v = x[i];
    s += v * v;
  }
  return s;
}

void axpy_f64_f32(double a, const float* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t xv = vld1q_f32(x + i);
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vcvt_f64_f32(vget_low_f32(xv))));
    vst1q_f64(y + i + 2, vfmaq_f64(vld1q_f64(y + i + 2), va, vcvt_high_f64_f32(xv)));
  }
  for (; i < n; ++i) y[i] += a * static_cast<double>(x[i]);
}

void standardize_f32(const float* x, const double* mean, const double* inv_scale, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t xv = vld1q_f32(x + i);
    const float64x2_t lo = vmulq_f64(vsubq_f64(vcvt_f64_f32(vget_low_f32(xv)), vld1q_f64(mean + i)),
                                     vld1q_f64(inv_scale + i));
    const float64x2_t hi = vmulq_f64(vsubq_f64(vcvt_high_f64_f32(xv), vld1q_f64(mean + i + 2)),
                                     vld1q_f64(inv_scale + i + 2));
    vst1q_f32(out + i, vcvt_high_f32_f64(vcvt_f32_f64(lo), hi));
  }
  for (; i < n; ++i) out[i] = static_cast<float>((static_cast<double>(x[i]) - mean[i]) * inv_scale[i]);
}

void cdiv_reg(const double* num, const double* den, double eps, double* out, std::size_t n) {
  const float64x2_t veps = vdupq_n_f64(eps);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2x2_t a = vld2q_f64(num + 2 * k);
    const float64x2x2_t d = vld2q_f64(den + 2 * k);
    const float64x2_t mag = vaddq_f64(vaddq_f64(vmulq_f64(d.val[0], d.val[0]), vmulq_f64(d.val[1], d.val[1])), veps);
    const float64x2_t inv = vdivq_f64(vdupq_n_f64(1.0), mag);
    float64x2x2_t r;
    r.val[0] = vmulq_f64(vaddq_f64(vmulq_f64(a.val[0], d.val[0]), vmulq_f64(a.val[1], d.val[1])), inv);
    r.val[1] = vmulq_f64(vsubq_f64(vmulq_f64(a.val[1], d.val[0]), vmulq_f64(a.val[0], d.val[1])), inv);
    vst2q_f64(out + 2 * k, r);
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
  for (; k + 2 <= n; k += 2) {
    const float64x2x2_t v = vld2q_f64(z + 2 * k);
    vst1q_f64(out + k, vsqrtq_f64(vaddq_f64(vmulq_f64(v.val[0], v.val[0]), vmulq_f64(v.val[1], v.val[1]))));
  }
  for (; k < n; ++k) out[k] = std::sqrt(z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1]);
}

}  // namespace uar::simd::neon
