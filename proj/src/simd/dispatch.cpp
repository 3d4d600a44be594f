#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"
#include "uar/simd/kernels.hpp"

namespace uar::simd {

namespace {

#define UAR_TABLE(ns, name) \
  KernelTable { name, ns::dot_f64, ns::dot_f64_f32, ns::dot_f32, ns::sumsq_f32, ns::axpy_f64_f32, ns::standardize_f32, ns::cdiv_reg, ns::cabs }

const KernelTable kScalar = UAR_TABLE(scalar, "scalar");
#if defined(UAR_HAVE_AVX2)
const KernelTable kAvx2 = UAR_TABLE(avx2, "avx2");
#endif
#if defined(UAR_HAVE_NEON)
const KernelTable kNeon = UAR_TABLE(neon, "neon");
#endif

#undef UAR_TABLE

const KernelTable& select() {
  const char* forced = std::getenv("UAR_SIMD");
  const std::string_view want = forced ? forced : "";
  if (want == "scalar") return kScalar;
  const KernelTable* best = &kScalar;
  if (const auto* t = neon_kernels()) best = t;
  if (const auto* t = avx2_kernels()) best = t;
  if (!want.empty()) {
    for (const auto* t : available_kernels())
      if (t->isa == want) return *t;
  }
  return *best;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable* avx2_kernels() {
#if defined(UAR_HAVE_AVX2)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(UAR_HAVE_NEON)
  return &kNeon;  // Advanced SIMD is mandatory on AArch64.
#else
  return nullptr;
#endif
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&kScalar};
  if (const auto* t = avx2_kernels()) out.push_back(t);
  if (const auto* t = neon_kernels()) out.push_back(t);
  return out;
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace uar::simd
