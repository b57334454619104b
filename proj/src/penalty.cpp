#include "gridsmooth/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridsmooth/kernels.hpp"

namespace gridsmooth {

double PenaltyMatrix::at(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int k = j - i;
  if (k > band_half_width) return 0.0;
  return diagonals[static_cast<std::size_t>(k) * dim + i];
}

void PenaltyMatrix::matvec(std::span<const double> x, std::span<double> y) const {
  const int d = dim;
  const double* main_diag = diagonals.data();
  for (int i = 0; i < d; ++i) y[i] = main_diag[i] * x[i];
  for (int k = 1; k <= band_half_width; ++k) {
    const double* diag = diagonals.data() + static_cast<std::size_t>(k) * d;
    for (int i = 0; i + k < d; ++i) {
      const double v = diag[i];
      y[i] += v * x[i + k];
      y[i + k] += v * x[i];
    }
  }
}

double PenaltyMatrix::quad_form(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(dim));
  matvec(x, y);
  return kernels::dot(x, y);
}

double PenaltyMatrix::inf_norm() const {
  double best = 0.0;
  for (int i = 0; i < dim; ++i) {
    double row = 0.0;
    const int lo = std::max(0, i - band_half_width);
    const int hi = std::min(dim - 1, i + band_half_width);
    for (int j = lo; j <= hi; ++j) row += std::fabs(at(i, j));
    best = std::max(best, row);
  }
  return best;
}

void PenaltyMatrix::add_scaled(const PenaltyMatrix& other, double scale) {
  if (other.dim != dim)
    throw invalid_parameter("penalty: dimension mismatch (" + std::to_string(dim) +
                            " vs " + std::to_string(other.dim) + ")");
  if (other.band_half_width > band_half_width) {
    diagonals.resize(static_cast<std::size_t>(other.band_half_width + 1) * dim, 0.0);
    band_half_width = other.band_half_width;
  }
  for (int k = 0; k <= other.band_half_width; ++k) {
    double* dst = diagonals.data() + static_cast<std::size_t>(k) * dim;
    const double* src = other.diagonals.data() + static_cast<std::size_t>(k) * other.dim;
    for (int i = 0; i + k < dim; ++i) dst[i] += scale * src[i];
  }
}

std::vector<double> PenaltyMatrix::to_dense() const {
  std::vector<double> dense(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int j = std::max(0, i - band_half_width);
         j <= std::min(dim - 1, i + band_half_width); ++j)
      dense[static_cast<std::size_t>(i) * dim + j] = at(i, j);
  return dense;
}

void PenaltySpec::validate() const {
  if (orders.empty()) throw invalid_parameter("penalty spec: no orders given");
  if (orders.size() != alphas.size())
    throw invalid_parameter("penalty spec: orders and alphas differ in length");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw invalid_parameter("penalty spec: eta must lie in [0, 1]");
  for (int r : orders)
    if (r < 1 || r > kMaxSupportedOrder)
      throw invalid_parameter("penalty spec: order " + std::to_string(r) +
                              " outside 1.." + std::to_string(kMaxSupportedOrder));
  for (double a : alphas)
    if (!(a >= 0.0) || !std::isfinite(a))
      throw invalid_parameter("penalty spec: alphas must be finite and nonnegative");
}

PenaltyMatrix penalty_from_stencil(const Stencil& stencil, int dim) {
  const int L = stencil.half_width;
  const int support = 2 * L + 1;
  if (dim < support)
    throw curve_too_short("penalty: dim " + std::to_string(dim) +
                          " below stencil support " + std::to_string(support));
  PenaltyMatrix p;
  p.dim = dim;
  p.band_half_width = 2 * L;
  p.diagonals.assign(static_cast<std::size_t>(2 * L + 1) * dim, 0.0);
  const int rows = dim - 2 * L;
  for (int t = 0; t < rows; ++t) {
    for (int a = 0; a < support; ++a) {
      const double wa = stencil.weights[static_cast<std::size_t>(a)];
      if (wa == 0.0) continue;
      for (int b = a; b < support; ++b) {
        const double wb = stencil.weights[static_cast<std::size_t>(b)];
        if (wb == 0.0) continue;
        p.diagonals[static_cast<std::size_t>(b - a) * dim + (t + a)] += wa * wb;
      }
    }
  }
  return p;
}

PenaltyMatrix blend(const PenaltyMatrix& standard, const PenaltyMatrix& calibrated,
                    double eta) {
  if (standard.dim != calibrated.dim)
    throw invalid_parameter("blend: dimension mismatch");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw invalid_parameter("blend: eta must lie in [0, 1]");
  if (eta == 0.0) return standard;
  if (eta == 1.0) return calibrated;
  PenaltyMatrix out;
  out.dim = standard.dim;
  out.band_half_width = 0;
  out.diagonals.assign(static_cast<std::size_t>(standard.dim), 0.0);
  out.add_scaled(standard, 1.0 - eta);
  out.add_scaled(calibrated, eta);
  return out;
}

double binomial_raw_norm_sq(int order) {
  if (order < 0) throw invalid_parameter("binomial_raw_norm_sq: negative order");
  double v = 1.0;  // C(2r, r) via the product formula
  for (int k = 1; k <= order; ++k) v = v * (order + k) / k;
  return v;
}

PenaltyMatrix blended_penalty(const StencilFamily& family,
                              std::span<const Stencil> binomials, int order,
                              double eta, int dim) {
  if (order < 1 || order > family.max_order || order >= static_cast<int>(binomials.size()))
    throw invalid_parameter("blended_penalty: order " + std::to_string(order) +
                            " not covered by the stencil families");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw invalid_parameter("blended_penalty: eta must lie in [0, 1]");
  PenaltyMatrix out;
  out.dim = dim;
  out.band_half_width = 0;
  out.diagonals.assign(static_cast<std::size_t>(dim), 0.0);
  if (eta < 1.0)
    out.add_scaled(penalty_from_stencil(binomials[static_cast<std::size_t>(order)], dim),
                   (1.0 - eta) * binomial_raw_norm_sq(order));
  if (eta > 0.0)
    out.add_scaled(penalty_from_stencil(family.member(order), dim), eta);
  return out;
}

PenaltyMatrix aggregate(const StencilFamily& family, std::span<const Stencil> binomials,
                        const PenaltySpec& spec, int dim) {
  spec.validate();
  if (spec.mode != PenaltyMode::simultaneous)
    throw invalid_parameter("aggregate: spec mode must be simultaneous");
  PenaltyMatrix out;
  out.dim = dim;
  out.band_half_width = 0;
  out.diagonals.assign(static_cast<std::size_t>(dim), 0.0);
  for (std::size_t i = 0; i < spec.orders.size(); ++i) {
    const int r = spec.orders[i];
    const double a = spec.alphas[i];
    if (a == 0.0) continue;
    if (spec.eta < 1.0)
      out.add_scaled(penalty_from_stencil(binomials[static_cast<std::size_t>(r)], dim),
                     a * (1.0 - spec.eta) * binomial_raw_norm_sq(r));
    if (spec.eta > 0.0)
      out.add_scaled(penalty_from_stencil(family.member(r), dim), a * spec.eta);
  }
  return out;
}

}  // namespace gridsmooth
