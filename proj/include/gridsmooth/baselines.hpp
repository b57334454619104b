#pragma once

#include <span>
#include <vector>

#include "gridsmooth/errors.hpp"

namespace gridsmooth {

enum class BasisKind { fourier, bspline };

/// Penalized basis smoother: fitted values B (B^T B + alpha Omega)^{-1} B^T x
/// with B the basis evaluated on the unit grid t = (1..d)/d and Omega the
/// Gram matrix of penalty_order-th derivatives. The Fourier penalty is exact
/// (diagonal); the B-spline penalty uses Gauss-Legendre quadrature per knot
/// span. Immutable after construction.
class BasisSmoother {
 public:
  BasisSmoother(BasisKind kind, int n_basis, int penalty_order, int dim);

  std::vector<double> fit(std::span<const double> curve, double alpha) const;
  double effective_df(double alpha) const;

  BasisKind kind() const { return kind_; }
  int n_basis() const { return n_basis_; }
  int dim() const { return dim_; }
  /// Row-major d x n_basis design matrix.
  const std::vector<double>& design() const { return design_; }
  /// Row-major n_basis x n_basis derivative Gram matrix.
  const std::vector<double>& penalty() const { return penalty_; }

 private:
  BasisKind kind_;
  int n_basis_;
  int penalty_order_;
  int dim_;
  std::vector<double> design_;
  std::vector<double> penalty_;
  std::vector<double> btb_;  // n_basis x n_basis
};

/// One-shot basis fit.
std::vector<double> fit_basis(BasisKind kind, int n_basis, int penalty_order, double alpha,
                              std::span<const double> curve);

/// Nadaraya-Watson smoother with Gaussian weights on the unit grid,
/// w_{ts} proportional to exp(-(t-s)^2 / (2 h^2 d^2)), rows renormalized
/// at the boundaries.
class KernelSmoother {
 public:
  KernelSmoother(int dim, double bandwidth);

  std::vector<double> apply(std::span<const double> curve) const;

  int dim() const { return dim_; }
  double bandwidth() const { return bandwidth_; }
  double weight(int t, int s) const {
    return weights_[static_cast<std::size_t>(t) * dim_ + s];
  }

 private:
  int dim_;
  double bandwidth_;
  std::vector<double> weights_;  // row-major, row-stochastic
};

/// One-shot kernel smooth.
std::vector<double> kernel_smooth(std::span<const double> curve, double bandwidth);

}  // namespace gridsmooth
