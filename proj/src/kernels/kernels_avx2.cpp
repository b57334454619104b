// AVX2+FMA kernel variants. This translation unit is built with
// -mavx2 -mfma on x86-64; on other targets it degrades to stubs and the
// dispatcher falls back to the scalar backend.

#include "gridsmooth/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace gridsmooth::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void convolve_valid_avx2(const double* x, std::size_t nx, const double* w,
                         std::size_t nw, double* y) {
  const std::size_t ny = nx - nw + 1;
  std::size_t i = 0;
  for (; i + 8 <= ny; i += 8) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < nw; ++j) {
      const __m256d vw = _mm256_set1_pd(w[j]);
      acc0 = _mm256_fmadd_pd(vw, _mm256_loadu_pd(x + i + j), acc0);
      acc1 = _mm256_fmadd_pd(vw, _mm256_loadu_pd(x + i + j + 4), acc1);
    }
    _mm256_storeu_pd(y + i, acc0);
    _mm256_storeu_pd(y + i + 4, acc1);
  }
  for (; i + 4 <= ny; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < nw; ++j)
      acc = _mm256_fmadd_pd(_mm256_set1_pd(w[j]), _mm256_loadu_pd(x + i + j), acc);
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < ny; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < nw; ++j) s += w[j] * x[i + j];
    y[i] = s;
  }
}

void matvec_avx2(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

constexpr Ops kAvx2Ops{dot_avx2,  sum_sq_avx2,         sum_sq_diff_avx2,
                       axpy_avx2, convolve_valid_avx2, matvec_avx2};

}  // namespace

const Ops* avx2_ops() { return &kAvx2Ops; }

bool avx2_available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace gridsmooth::kernels

#else

namespace gridsmooth::kernels {
const Ops* avx2_ops() { return nullptr; }
bool avx2_available() { return false; }
}  // namespace gridsmooth::kernels

#endif
