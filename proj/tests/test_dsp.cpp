#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracle.hpp"
#include "uar/chirp.hpp"
#include "uar/dsp.hpp"
#include "uar/errors.hpp"

using namespace uar;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

}  // namespace

TEST_CASE("forward transform matches the direct DFT") {
  const auto x = gaussian(100, 3);
  const auto s = Spectrum::forward(x, 96000.0);
  REQUIRE(s.n == 128);
  std::vector<std::complex<double>> z(128, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i];
  const auto ref = oracle::dft(z, false);
  for (std::size_t k = 0; k < 128; ++k) CHECK(std::abs(s.bins[k] - ref[k]) < 1e-9);
  CHECK(s.bin_frequency(32) == doctest::Approx(24000.0));
}

TEST_CASE("inverse undoes forward and Parseval holds") {
  for (std::size_t n : {1u, 7u, 64u, 953u, 1133u}) {
    const auto x = gaussian(n, n);
    const auto s = Spectrum::forward(x, 96000.0);
    const auto back = s.inverse(n);
    for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-9));
    double et = 0.0, ef = 0.0;
    for (double v : x) et += v * v;
    for (const auto& b : s.bins) ef += std::norm(b);
    ef /= static_cast<double>(s.n);
    CHECK(std::abs(et - ef) <= 1e-9 * et);
  }
  CHECK_THROWS_AS(Spectrum::forward(gaussian(10, 1), 1.0, 8), Error);
}

TEST_CASE("analytic signal matches the oracle and keeps the real part") {
  const auto x = gaussian(300, 9);
  const auto z = analytic_signal(x);
  const auto ref = oracle::analytic(x);
  REQUIRE(z.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(z[i] - ref[i]) < 1e-9);
  // The real part equals the input only without padding.
  const auto y = gaussian(256, 10);
  const auto zy = analytic_signal(y);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(zy[i].real() == doctest::Approx(y[i]).epsilon(1e-9));
}

TEST_CASE("envelope of a Hann-windowed tone follows the window") {
  const std::size_t n = 1024;
  const double fs = 96000.0, f = 30000.0;
  auto burst = [&](double phase) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 * (1.0 - std::cos(2.0 * oracle::kPi * double(i) / double(n - 1)));
      x[i] = w * std::cos(2.0 * oracle::kPi * f * double(i) / fs + phase);
    }
    return x;
  };
  const auto e0 = analytic_envelope(burst(0.0));
  const auto e1 = analytic_envelope(burst(1.3));
  double worst = 0.0, worst_phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * oracle::kPi * double(i) / double(n - 1)));
    worst = std::max(worst, std::abs(e0[i] - w));
    worst_phase = std::max(worst_phase, std::abs(e0[i] - e1[i]));
  }
  CHECK(worst < 0.05);
  CHECK(worst_phase < 0.05);
  CHECK_THROWS_AS(analytic_envelope(std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("matched filter equals naive normalized correlation") {
  const auto templ = design_chirp({});
  auto sig = gaussian(2000, 5, 0.05);
  for (std::size_t i = 0; i < templ.size(); ++i) {
    sig[300 + i] += templ[i];
    sig[1433 + i] += 0.8 * templ[i];
  }
  const auto r = matched_filter(sig, templ);
  REQUIRE(r.correlation.size() == sig.size() - templ.size() + 1);
  double energy = 0.0;
  for (double v : templ) energy += v * v;
  for (std::size_t lag = 0; lag < r.correlation.size(); lag += 37) {
    double c = 0.0, w = 0.0;
    for (std::size_t i = 0; i < templ.size(); ++i) {
      c += sig[lag + i] * templ[i];
      w += sig[lag + i] * sig[lag + i];
    }
    CHECK(r.correlation[lag] == doctest::Approx(c / energy).epsilon(1e-9));
    CHECK(r.coherence[lag] == doctest::Approx(c / std::sqrt(energy * w)).epsilon(1e-9));
    CHECK(std::abs(r.coherence[lag]) <= 1.0 + 1e-12);
  }
  REQUIRE(r.peaks.size() == 2);
  CHECK(r.peaks[0] == 300);
  CHECK(r.peaks[1] == 1433);
  CHECK(r.correlation[300] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.coherence[300] > 0.99);
}

TEST_CASE("matched filter peaks respect the minimum separation") {
  std::mt19937_64 rng(21);
  const auto templ = design_chirp({});
  for (int trial = 0; trial < 50; ++trial) {
    const auto sig = gaussian(4000, 100 + trial);
    MatchedFilterOptions opt;
    opt.threshold_ratio = 0.2;
    opt.min_separation = 50 + rng() % 500;
    const auto r = matched_filter(sig, templ, opt);
    const double top = *std::max_element(r.correlation.begin(), r.correlation.end());
    for (std::size_t i = 0; i < r.peaks.size(); ++i) {
      CHECK(r.correlation[r.peaks[i]] >= opt.threshold_ratio * top);
      if (i > 0) CHECK(r.peaks[i] - r.peaks[i - 1] >= opt.min_separation);
    }
  }
}

TEST_CASE("matched filter rejects bad templates") {
  const std::vector<double> sig(100, 1.0), zero(10, 0.0), longer(200, 1.0);
  CHECK_THROWS_AS(matched_filter(sig, std::vector<double>{}), Error);
  CHECK_THROWS_AS(matched_filter(sig, longer), Error);
  try {
    matched_filter(sig, zero);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("deconvolution recovers a delayed scaled copy") {
  const auto chirp = design_chirp({});
  for (std::size_t shift : {10u, 40u, 200u, 392u, 800u}) {
    for (double scale : {0.1, 0.3, 0.5, 1.0}) {
      std::vector<double> dir(1024, 0.0), ref(1024, 0.0);
      for (std::size_t i = 0; i < chirp.size(); ++i) {
        dir[i] = chirp[i];
        ref[i + shift] = scale * chirp[i];
      }
      const auto h = transfer_impulse_response(dir, ref);
      REQUIRE(h.size() == 1024);
      const auto peak = std::max_element(h.begin(), h.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
      CHECK(static_cast<std::size_t>(peak - h.begin()) == shift);
      CHECK(*peak == doctest::Approx(scale).epsilon(0.10));
    }
  }
}

TEST_CASE("deconvolution is linear in the reflection") {
  const auto dir = gaussian(953, 1);
  const auto a = gaussian(953, 2), b = gaussian(953, 3);
  std::vector<double> sum(953);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = 2.0 * a[i] - 0.5 * b[i];
  const auto ha = transfer_impulse_response(dir, a);
  const auto hb = transfer_impulse_response(dir, b);
  const auto hs = transfer_impulse_response(dir, sum);
  for (std::size_t i = 0; i < sum.size(); ++i) CHECK(std::abs(hs[i] - (2.0 * ha[i] - 0.5 * hb[i])) < 1e-9);
}

TEST_CASE("deconvolution input errors") {
  const std::vector<double> a(64, 1.0), b(32, 1.0), z(64, 0.0);
  CHECK_THROWS_AS(transfer_impulse_response(a, b), Error);
  DeconvolutionOptions bad;
  bad.f_hi = 60000.0;
  CHECK_THROWS_AS(transfer_impulse_response(a, a, bad), Error);
  try {
    transfer_impulse_response(z, a);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("matched-filter peaks move with the signal") {
  const auto templ = design_chirp({});
  auto base = gaussian(3000, 40, 0.05);
  for (std::size_t i = 0; i < templ.size(); ++i) {
    base[200 + i] += templ[i];
    base[1333 + i] += templ[i];
  }
  MatchedFilterOptions opt;
  opt.min_separation = 500;
  const auto p0 = matched_filter(base, templ, opt).peaks;
  REQUIRE(p0.size() == 2);
  for (std::size_t k : {1u, 17u, 250u, 1000u}) {
    std::vector<double> shifted(k, 0.0);
    shifted.insert(shifted.end(), base.begin(), base.end());
    const auto pk = matched_filter(shifted, templ, opt).peaks;
    REQUIRE(pk.size() == p0.size());
    for (std::size_t i = 0; i < pk.size(); ++i) CHECK(pk[i] == p0[i] + k);
  }
}

TEST_CASE("delaying the reflection delays the impulse-response peak") {
  const auto chirp = design_chirp({});
  std::vector<double> dir(953, 0.0);
  std::copy(chirp.begin(), chirp.end(), dir.begin());
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t a = rng() % 300, k = rng() % 400;
    std::vector<double> r0(953, 0.0), r1(953, 0.0);
    for (std::size_t i = 0; i < chirp.size(); ++i) {
      r0[a + i] = 0.4 * chirp[i];
      r1[a + k + i] = 0.4 * chirp[i];
    }
    const auto h0 = transfer_impulse_response(dir, r0);
    const auto h1 = transfer_impulse_response(dir, r1);
    auto peak = [](const std::vector<double>& h) {
      return static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
    };
    CHECK(peak(h1) == peak(h0) + k);
  }
}
