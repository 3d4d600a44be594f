#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "uar/simd/kernels.hpp"

using uar::simd::KernelTable;

namespace {

struct Inputs {
  std::vector<double> a, b, mean, inv_scale, ca, cb;
  std::vector<float> fa, fb;
};

Inputs make_inputs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  Inputs in;
  for (std::size_t i = 0; i < n; ++i) {
    in.a.push_back(g(rng));
    in.b.push_back(g(rng));
    in.fa.push_back(static_cast<float>(g(rng)));
    in.fb.push_back(static_cast<float>(g(rng)));
    in.mean.push_back(g(rng));
    in.inv_scale.push_back(1.0 / u(rng));
  }
  for (std::size_t i = 0; i < 2 * n; ++i) {
    in.ca.push_back(g(rng));
    in.cb.push_back(g(rng));
  }
  return in;
}

bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }
bool same_bits(float x, float y) { return std::memcmp(&x, &y, sizeof x) == 0; }

}  // namespace

TEST_CASE("kernel tables list scalar first and dispatch to one of them") {
  const auto tables = uar::simd::available_kernels();
  REQUIRE_FALSE(tables.empty());
  CHECK(tables.front()->isa == "scalar");
  bool found = false;
  for (const auto* t : tables) found = found || t->isa == uar::simd::kernels().isa;
  CHECK(found);
}

TEST_CASE("vector kernels agree with the scalar reference") {
  const auto& ref = uar::simd::scalar_kernels();
  for (const KernelTable* t : uar::simd::available_kernels()) {
    CAPTURE(t->isa);
    // Lengths straddle every unroll width and remainder path.
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 31u, 33u, 64u, 953u, 1000u, 4099u}) {
      CAPTURE(n);
      const auto in = make_inputs(n, 1000 + n);
      auto near = [n](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::sqrt(double(n))) * (1.0 + std::abs(y)); };

      CHECK(near(t->dot_f64(in.a.data(), in.b.data(), n), ref.dot_f64(in.a.data(), in.b.data(), n)));
      CHECK(near(t->dot_f64_f32(in.a.data(), in.fa.data(), n), ref.dot_f64_f32(in.a.data(), in.fa.data(), n)));
      CHECK(near(t->dot_f32(in.fa.data(), in.fb.data(), n), ref.dot_f32(in.fa.data(), in.fb.data(), n)));
      CHECK(near(t->sumsq_f32(in.fa.data(), n), ref.sumsq_f32(in.fa.data(), n)));

      std::vector<double> y1 = in.b, y2 = in.b;
      t->axpy_f64_f32(0.37, in.fa.data(), y1.data(), n);
      ref.axpy_f64_f32(0.37, in.fa.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

      std::vector<float> s1(n), s2(n);
      t->standardize_f32(in.fa.data(), in.mean.data(), in.inv_scale.data(), s1.data(), n);
      ref.standardize_f32(in.fa.data(), in.mean.data(), in.inv_scale.data(), s2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(s1[i], s2[i]));

      std::vector<double> q1(2 * n), q2(2 * n);
      t->cdiv_reg(in.ca.data(), in.cb.data(), 1e-3, q1.data(), n);
      ref.cdiv_reg(in.ca.data(), in.cb.data(), 1e-3, q2.data(), n);
      for (std::size_t i = 0; i < 2 * n; ++i) CHECK(same_bits(q1[i], q2[i]));

      std::vector<double> m1(n), m2(n);
      t->cabs(in.ca.data(), m1.data(), n);
      ref.cabs(in.ca.data(), m2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(m1[i], m2[i]));
    }
  }
}

TEST_CASE("scalar kernels match direct formulas") {
  const auto& k = uar::simd::scalar_kernels();
  const double num[] = {3.0, 4.0};
  const double den[] = {1.0, 2.0};
  double out[2];
  k.cdiv_reg(num, den, 0.0, out, 1);
  // (3 + 4i)(1 - 2i) / 5 = (11 - 2i) / 5
  CHECK(out[0] == doctest::Approx(2.2));
  CHECK(out[1] == doctest::Approx(-0.4));
  double mag;
  k.cabs(num, &mag, 1);
  CHECK(mag == 5.0);
}
