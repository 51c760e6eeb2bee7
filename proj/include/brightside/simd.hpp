#pragma once

// Vector primitives used on the hot paths (sphere geometry, regression
// likelihoods). Each primitive has a scalar reference implementation and,
// where the CPU allows, an AVX2/FMA or NEON variant. The variant is chosen once
// at first use from the CPU features and the BRIGHTSIDE_SIMD environment
// variable ("scalar", "avx2", "neon" or "auto").

#include <cstddef>
#include <span>
#include <string_view>

namespace brightside::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b) noexcept;

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = A x, A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* out);
  // out = A^T w, A row-major rows x cols
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* w, double* out);
};

const KernelTable& scalar_kernels() noexcept;
// nullptr when the variant was not compiled in or the CPU lacks the features.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

const KernelTable& active() noexcept;
Backend active_backend() noexcept;
// Overrides the dispatch choice. Returns false if the backend is unavailable.
// Not synchronized with concurrent kernel calls; intended for tests and startup.
bool set_backend(Backend b) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> out) {
  active().gemv(a.data(), rows, cols, x.data(), out.data());
}
inline void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
                   std::span<const double> w, std::span<double> out) {
  active().gemv_t(a.data(), rows, cols, w.data(), out.data());
}

}  // namespace brightside::simd
