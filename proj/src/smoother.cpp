#include "gridsmooth/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gridsmooth {

Smoother Smoother::make(const PenaltyMatrix& penalty, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw invalid_parameter("smoother: alpha must be finite and nonnegative");

  Smoother s;
  s.dim_ = penalty.dim;
  s.bw_ = alpha == 0.0 ? 0 : penalty.band_half_width;
  s.alpha_ = alpha;
  s.penalty_inf_norm_ = penalty.inf_norm();

  const int d = s.dim_;
  const int bw = s.bw_;
  s.factor_.assign(static_cast<std::size_t>(bw + 1) * d, 0.0);
  auto lval = [&](int i, int j) -> double& {
    // caller guarantees 0 <= i - j <= bw
    return s.factor_[static_cast<std::size_t>(i - j) * d + j];
  };

  // banded Cholesky of A = I + alpha P
  for (int j = 0; j < d; ++j) {
    double diag = 1.0 + alpha * penalty.at(j, j);
    for (int m = std::max(0, j - bw); m < j; ++m) diag -= lval(j, m) * lval(j, m);
    if (!(diag > 0.0))
      throw numeric_error("smoother: factorization failed at column " + std::to_string(j));
    const double ljj = std::sqrt(diag);
    lval(j, j) = ljj;
    for (int i = j + 1; i <= std::min(d - 1, j + bw); ++i) {
      double v = alpha * penalty.at(i, j);
      for (int m = std::max({0, i - bw, j - bw}); m < j; ++m)
        v -= lval(i, m) * lval(j, m);
      lval(i, j) = v / ljj;
    }
  }

  // trace of (I + alpha P)^{-1}: diagonal entries are the squared norms of
  // the forward solves against basis vectors
  std::vector<double> col(static_cast<std::size_t>(d));
  double trace = 0.0;
  for (int j = 0; j < d; ++j) {
    col[j] = 1.0 / lval(j, j);
    trace += col[j] * col[j];
    for (int i = j + 1; i < d; ++i) {
      double v = 0.0;
      for (int m = std::max({j, i - bw}); m < i; ++m) v += lval(i, m) * col[m];
      col[i] = -v / lval(i, i);
      trace += col[i] * col[i];
    }
  }
  s.trace_ = trace;
  return s;
}

void Smoother::solve_in_place(std::vector<double>& x) const {
  const int d = dim_;
  const int bw = bw_;
  const double* f = factor_.data();
  auto lget = [&](int i, int j) { return f[static_cast<std::size_t>(i - j) * d + j]; };

  for (int i = 0; i < d; ++i) {
    double v = x[i];
    for (int m = std::max(0, i - bw); m < i; ++m) v -= lget(i, m) * x[m];
    x[i] = v / lget(i, i);
  }
  for (int i = d - 1; i >= 0; --i) {
    double v = x[i];
    const int hi = std::min(d - 1, i + bw);
    for (int m = i + 1; m <= hi; ++m) v -= lget(m, i) * x[m];
    x[i] = v / lget(i, i);
  }
}

std::vector<double> Smoother::apply(std::span<const double> curve) const {
  if (static_cast<int>(curve.size()) != dim_)
    throw invalid_parameter("smoother: curve length " + std::to_string(curve.size()) +
                            " does not match dim " + std::to_string(dim_));
  std::vector<double> out(curve.begin(), curve.end());
  solve_in_place(out);
  return out;
}

SequentialResult smooth_sequential(std::span<const double> curve, const PenaltySpec& spec,
                                   const StencilFamily& family,
                                   std::span<const Stencil> binomials) {
  spec.validate();
  if (spec.mode != PenaltyMode::sequential)
    throw invalid_parameter("smooth_sequential: spec mode must be sequential");
  for (std::size_t i = 1; i < spec.orders.size(); ++i)
    if (spec.orders[i] >= spec.orders[i - 1])
      throw invalid_parameter("smooth_sequential: orders must be strictly descending");

  const int d = static_cast<int>(curve.size());
  SequentialResult result;
  std::vector<double> f(curve.begin(), curve.end());
  for (std::size_t i = 0; i < spec.orders.size(); ++i) {
    const PenaltyMatrix p = blended_penalty(family, binomials, spec.orders[i], spec.eta, d);
    f = Smoother::make(p, spec.alphas[i]).apply(f);
    result.steps.push_back(f);
  }
  result.output = f;
  return result;
}

std::vector<double> smooth_simultaneous(std::span<const double> curve,
                                        const PenaltySpec& spec,
                                        const StencilFamily& family,
                                        std::span<const Stencil> binomials) {
  spec.validate();
  if (spec.mode != PenaltyMode::simultaneous)
    throw invalid_parameter("smooth_simultaneous: spec mode must be simultaneous");
  const PenaltyMatrix p = aggregate(family, binomials, spec, static_cast<int>(curve.size()));
  return Smoother::make(p, 1.0).apply(curve);
}

}  // namespace gridsmooth
