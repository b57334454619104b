#include "gridsmooth/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "gridsmooth/errors.hpp"

namespace gridsmooth::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void convolve_valid_scalar(const double* x, std::size_t nx, const double* w,
                           std::size_t nw, double* y) {
  const std::size_t ny = nx - nw + 1;
  for (std::size_t i = 0; i < ny; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < nw; ++j) s += w[j] * x[i + j];
    y[i] = s;
  }
}

void matvec_scalar(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

constexpr Ops kScalarOps{dot_scalar,  sum_sq_scalar,         sum_sq_diff_scalar,
                         axpy_scalar, convolve_valid_scalar, matvec_scalar};

std::atomic<const Ops*> g_active{nullptr};
std::atomic<const char*> g_name{nullptr};

const Ops* resolve_auto(const char** name) {
  if (const Ops* v = avx2_ops(); v && avx2_available()) {
    *name = "avx2";
    return v;
  }
  *name = "scalar";
  return &kScalarOps;
}

const Ops* resolve(std::string_view want, const char** name) {
  if (want == "scalar") {
    *name = "scalar";
    return &kScalarOps;
  }
  if (want == "avx2") {
    const Ops* v = avx2_ops();
    if (!v || !avx2_available())
      throw invalid_parameter("kernels: avx2 backend unavailable on this CPU");
    *name = "avx2";
    return v;
  }
  if (want == "auto" || want.empty()) return resolve_auto(name);
  throw invalid_parameter("kernels: unknown backend '" + std::string(want) + "'");
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& ops() {
  const Ops* p = g_active.load(std::memory_order_acquire);
  if (!p) {
    const char* env = std::getenv("GRIDSMOOTH_KERNELS");
    const char* name = "scalar";
    p = resolve(env ? std::string_view(env) : std::string_view("auto"), &name);
    g_name.store(name, std::memory_order_release);
    g_active.store(p, std::memory_order_release);
  }
  return *p;
}

std::string_view active_backend() {
  ops();
  return g_name.load(std::memory_order_acquire);
}

void force_backend(std::string_view name) {
  const char* resolved = "scalar";
  const Ops* p = resolve(name, &resolved);
  g_name.store(resolved, std::memory_order_release);
  g_active.store(p, std::memory_order_release);
}

}  // namespace gridsmooth::kernels
