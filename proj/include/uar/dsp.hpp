#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace uar {

/// Smallest power of two >= n (n = 0 gives 1).
std::size_t next_pow2(std::size_t n);

/// Full complex DFT of a real signal zero-padded to n bins.
struct Spectrum {
  std::vector<std::complex<double>> bins;
  double fs = 0.0;
  std::size_t n = 0;

  /// Forward transform; n defaults to next_pow2(signal.size()).
  static Spectrum forward(std::span<const double> signal, double fs, std::size_t n = 0);
  /// Real part of the inverse transform, cropped to `length` samples (0 = all n).
  std::vector<double> inverse(std::size_t length = 0) const;

  double bin_frequency(std::size_t k) const { return static_cast<double>(k) * fs / static_cast<double>(n); }
};

/// Analytic signal of `signal` via the one-sided spectrum, padded to a power of two
/// and cropped back to the input length.
std::vector<std::complex<double>> analytic_signal(std::span<const double> signal);

/// |analytic_signal(signal)|. Requires at least 4 samples.
std::vector<double> analytic_envelope(std::span<const double> signal);

struct MatchedFilterOptions {
  double threshold_ratio = 0.5;      // peaks must reach this fraction of the global maximum
  std::size_t min_separation = 989;  // samples; n_cycle - n_tau for the default excitation
};

struct MatchedFilterResult {
  // corr[k] = sum_i signal[k + i] * template[i] / ||template||^2, so a unit-gain
  // copy of the template scores 1.0. Length signal.size() - template.size() + 1.
  std::vector<double> correlation;
  // Normalized cross-correlation (cosine similarity) with the local window, in [-1, 1].
  std::vector<double> coherence;
  std::vector<std::size_t> peaks;  // ascending
};

/// Sliding correlation against a known template plus thresholded peak picking.
MatchedFilterResult matched_filter(std::span<const double> signal, std::span<const double> templ,
                                   const MatchedFilterOptions& options = {});

struct DeconvolutionOptions {
  double f_lo = 20'000.0;
  double f_hi = 40'000.0;
  double fs = 96'000.0;
  // Regularizer relative to max |Y_dir|^2; the absolute eps is rel_eps * max|Y_dir|^2.
  double rel_eps = 1e-6;
};

/// Impulse response h with Y_ref = H * Y_dir inside [f_lo, f_hi]:
/// inverse of Y_ref conj(Y_dir) / (|Y_dir|^2 + eps), out-of-band bins zeroed.
/// The result is scaled by n / (2 * in-band bins) so an identity system peaks at 1.
/// Both inputs must have the same length; output has that length.
std::vector<double> transfer_impulse_response(std::span<const double> direct, std::span<const double> reflected,
                                              const DeconvolutionOptions& options = {});

}  // namespace uar
