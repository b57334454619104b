#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace gridsmooth::kernels {

// Raw-array compute kernels behind the arithmetic inner loops: stencil
// convolution, reductions, and dense matrix-vector products. A scalar
// reference implementation always exists; an AVX2+FMA variant is selected
// at runtime when the CPU supports it. The two are equivalence-tested in
// tests/test_kernels.cpp. Set GRIDSMOOTH_KERNELS=scalar|avx2 to override
// the automatic choice.

struct Ops {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[i] = sum_j w[j] * x[i + j] for i = 0 .. nx - nw (valid correlation)
  void (*convolve_valid)(const double* x, std::size_t nx, const double* w,
                         std::size_t nw, double* y);
  // y = A x with A row-major (rows x cols)
  void (*matvec)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y);
};

/// The backend in use (resolved once per process).
const Ops& ops();

/// Scalar reference backend, always available.
const Ops& scalar_ops();

/// AVX2 backend, or nullptr when unsupported on this CPU/build.
const Ops* avx2_ops();

bool avx2_available();
std::string_view active_backend();  // "scalar" or "avx2"

/// Test hook: force a backend by name ("auto", "scalar", "avx2").
/// Throws invalid_parameter for unknown or unavailable backends.
void force_backend(std::string_view name);

// convenience span wrappers

inline double dot(std::span<const double> a, std::span<const double> b) {
  return ops().dot(a.data(), b.data(), a.size());
}
inline double sum_sq(std::span<const double> a) {
  return ops().sum_sq(a.data(), a.size());
}
inline double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  return ops().sum_sq_diff(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  ops().axpy(alpha, x.data(), y.data(), x.size());
}
inline void convolve_valid(std::span<const double> x, std::span<const double> w,
                           std::span<double> y) {
  ops().convolve_valid(x.data(), x.size(), w.data(), w.size(), y.data());
}
inline void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
                   std::span<const double> x, std::span<double> y) {
  ops().matvec(a.data(), rows, cols, x.data(), y.data());
}

}  // namespace gridsmooth::kernels
