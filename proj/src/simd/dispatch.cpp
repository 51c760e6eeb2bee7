#include <atomic>
#include <cstdlib>
#include <string>

#include "brightside/simd.hpp"

namespace brightside::simd {

#if defined(BRIGHTSIDE_BUILD_AVX2)
const KernelTable* avx2_table_unchecked() noexcept;
#endif
#if defined(BRIGHTSIDE_BUILD_NEON)
const KernelTable* neon_table_unchecked() noexcept;
#endif

std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() noexcept {
#if defined(BRIGHTSIDE_BUILD_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return avx2_table_unchecked();
#endif
  return nullptr;
}

const KernelTable* neon_kernels() noexcept {
#if defined(BRIGHTSIDE_BUILD_NEON)
  return neon_table_unchecked();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* choose() noexcept {
  const char* env = std::getenv("BRIGHTSIDE_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return &scalar_kernels();
  if (want == "avx2") {
    if (auto* t = avx2_kernels()) return t;
    return &scalar_kernels();
  }
  if (want == "neon") {
    if (auto* t = neon_kernels()) return t;
    return &scalar_kernels();
  }
  if (auto* t = avx2_kernels()) return t;
  if (auto* t = neon_kernels()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{choose()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

Backend active_backend() noexcept { return active().backend; }

bool set_backend(Backend b) noexcept {
  const KernelTable* t = nullptr;
  switch (b) {
    case Backend::Scalar: t = &scalar_kernels(); break;
    case Backend::Avx2: t = avx2_kernels(); break;
    case Backend::Neon: t = neon_kernels(); break;
  }
  if (!t) return false;
  slot().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace brightside::simd
