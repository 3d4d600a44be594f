#include "uar/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

#include "uar/errors.hpp"
#include "uar/simd/kernels.hpp"

namespace uar {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto& slot = plans_[{n, sign}];
    if (!slot) {
      fftw_complex* buf = fftw_alloc_complex(n);
      slot = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
      fftw_free(buf);
    }
    return slot;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

void fft_inplace(std::vector<std::complex<double>>& data, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(PlanCache::instance().get(data.size(), sign), p, p);
}

std::vector<std::complex<double>> padded_complex(std::span<const double> x, std::size_t n) {
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
  return out;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Spectrum Spectrum::forward(std::span<const double> signal, double fs, std::size_t n) {
  if (n == 0) n = next_pow2(signal.size());
  if (n < signal.size()) fail(ErrorKind::Parameter, "transform length shorter than signal");
  Spectrum s;
  s.fs = fs;
  s.n = n;
  s.bins = padded_complex(signal, n);
  fft_inplace(s.bins, FFTW_FORWARD);
  return s;
}

std::vector<double> Spectrum::inverse(std::size_t length) const {
  if (length == 0) length = n;
  if (length > n) fail(ErrorKind::Parameter, "inverse crop longer than transform");
  auto work = bins;
  fft_inplace(work, FFTW_BACKWARD);
  std::vector<double> out(length);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < length; ++i) out[i] = work[i].real() * scale;
  return out;
}

std::vector<std::complex<double>> analytic_signal(std::span<const double> signal) {
  if (signal.empty()) fail(ErrorKind::Parameter, "analytic signal of empty input");
  const std::size_t n = next_pow2(signal.size());
  auto spec = padded_complex(signal, n);
  fft_inplace(spec, FFTW_FORWARD);
  // One-sided weights: DC and Nyquist kept, positive bins doubled, negative bins cleared.
  // The inverse transform below is unnormalized, so fold 1/n into the weights.
  const double inv_n = 1.0 / static_cast<double>(n);
  spec[0] *= inv_n;
  if (n > 1) {
    for (std::size_t k = 1; k < n / 2; ++k) spec[k] *= 2.0 * inv_n;
    spec[n / 2] *= inv_n;
    for (std::size_t k = n / 2 + 1; k < n; ++k) spec[k] = 0.0;
  }
  fft_inplace(spec, FFTW_BACKWARD);
  spec.resize(signal.size());
  return spec;
}

std::vector<double> analytic_envelope(std::span<const double> signal) {
  if (signal.size() < 4) fail(ErrorKind::Parameter, "envelope needs at least 4 samples");
  const auto z = analytic_signal(signal);
  std::vector<double> env(z.size());
  simd::kernels().cabs(reinterpret_cast<const double*>(z.data()), env.data(), z.size());
  return env;
}

MatchedFilterResult matched_filter(std::span<const double> signal, std::span<const double> templ,
                                   const MatchedFilterOptions& options) {
  if (templ.empty()) fail(ErrorKind::Parameter, "empty matched-filter template");
  if (templ.size() > signal.size()) fail(ErrorKind::Parameter, "template longer than signal");
  const auto& k = simd::kernels();
  const std::size_t len = templ.size();
  const double templ_energy = k.dot_f64(templ.data(), templ.data(), len);
  if (!(templ_energy > 0.0)) fail(ErrorKind::Degenerate, "matched-filter template has zero energy");

  const std::size_t lags = signal.size() - len + 1;
  MatchedFilterResult r;
  r.correlation.resize(lags);
  r.coherence.resize(lags);
  const double templ_norm = std::sqrt(templ_energy);
  for (std::size_t lag = 0; lag < lags; ++lag) {
    const double* window = signal.data() + lag;
    const double c = k.dot_f64(window, templ.data(), len);
    const double win_energy = k.dot_f64(window, window, len);
    r.correlation[lag] = c / templ_energy;
    r.coherence[lag] = win_energy > 0.0 ? c / (templ_norm * std::sqrt(win_energy)) : 0.0;
  }

  const double global_max = *std::max_element(r.correlation.begin(), r.correlation.end());
  if (!(global_max > 0.0)) return r;
  const double threshold = options.threshold_ratio * global_max;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < lags; ++i) {
    const double v = r.correlation[i];
    if (v < threshold) continue;
    const bool left_ok = i == 0 || v >= r.correlation[i - 1];
    const bool right_ok = i + 1 == lags || v > r.correlation[i + 1];
    if (left_ok && right_ok) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return r.correlation[a] > r.correlation[b]; });

  std::set<std::size_t> accepted;
  for (const std::size_t c : candidates) {
    const auto next = accepted.lower_bound(c);
    if (next != accepted.end() && *next - c < options.min_separation) continue;
    if (next != accepted.begin() && c - *std::prev(next) < options.min_separation) continue;
    accepted.insert(c);
  }
  r.peaks.assign(accepted.begin(), accepted.end());
  return r;
}

std::vector<double> transfer_impulse_response(std::span<const double> direct, std::span<const double> reflected,
                                              const DeconvolutionOptions& options) {
  if (direct.size() != reflected.size()) fail(ErrorKind::Parameter, "direct and reflected lengths differ");
  if (direct.empty()) fail(ErrorKind::Parameter, "empty deconvolution input");
  if (!(options.fs > 0.0 && options.f_lo > 0.0 && options.f_lo < options.f_hi && options.f_hi <= options.fs / 2.0))
    fail(ErrorKind::Parameter, "deconvolution band must satisfy 0 < f_lo < f_hi <= fs/2");

  const std::size_t n = next_pow2(direct.size());
  auto ydir = padded_complex(direct, n);
  auto yref = padded_complex(reflected, n);
  fft_inplace(ydir, FFTW_FORWARD);
  fft_inplace(yref, FFTW_FORWARD);

  double max_mag2 = 0.0;
  for (const auto& v : ydir) max_mag2 = std::max(max_mag2, std::norm(v));
  if (!(max_mag2 > 0.0)) fail(ErrorKind::Degenerate, "direct wave is all zeros");

  std::vector<std::complex<double>> h(n);
  simd::kernels().cdiv_reg(reinterpret_cast<const double*>(yref.data()),
                           reinterpret_cast<const double*>(ydir.data()), options.rel_eps * max_mag2,
                           reinterpret_cast<double*>(h.data()), n);

  std::size_t in_band = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t mirror = k <= n / 2 ? k : n - k;
    const double f = static_cast<double>(mirror) * options.fs / static_cast<double>(n);
    if (f < options.f_lo || f > options.f_hi) {
      h[k] = 0.0;
    } else if (k >= 1 && k < n / 2) {
      ++in_band;
    }
  }
  if (in_band == 0) fail(ErrorKind::Parameter, "deconvolution band contains no frequency bins");

  fft_inplace(h, FFTW_BACKWARD);
  // 1/n from the inverse transform times n / (2 * in_band) passband normalization.
  const double scale = 1.0 / (2.0 * static_cast<double>(in_band));
  std::vector<double> out(direct.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h[i].real() * scale;
  return out;
}

}  // namespace uar
