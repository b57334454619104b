#pragma once

#include <span>
#include <vector>

#include "gridsmooth/penalty.hpp"

namespace gridsmooth {

/// Factorized linear smoothing operator S = (I + alpha P)^{-1} with a
/// cached exact trace. I + alpha P has all eigenvalues >= 1, so the banded
/// Cholesky factorization always exists. Immutable after construction;
/// apply() is safe to call concurrently.
class Smoother {
 public:
  static Smoother make(const PenaltyMatrix& penalty, double alpha);

  /// Solves (I + alpha P) f = curve.
  std::vector<double> apply(std::span<const double> curve) const;

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double trace() const { return trace_; }
  double penalty_inf_norm() const { return penalty_inf_norm_; }

 private:
  Smoother() = default;
  void solve_in_place(std::vector<double>& x) const;

  int dim_ = 0;
  int bw_ = 0;  // band half-width of the factor
  double alpha_ = 0.0;
  double trace_ = 0.0;
  double penalty_inf_norm_ = 0.0;
  // lower-band Cholesky factor: L(j+k, j) at factor_[k*dim_ + j]
  std::vector<double> factor_;
};

struct SequentialResult {
  std::vector<double> output;                   // the final estimate f_1
  std::vector<std::vector<double>> steps;       // f_R, ..., f_1
};

/// Iterated smoothing across decreasing orders (spec.mode == sequential,
/// orders strictly descending): f_{R+1} = curve, f_r = (I + a_r P_r)^{-1} f_{r+1}
/// with P_r the order-r blended penalty.
SequentialResult smooth_sequential(std::span<const double> curve, const PenaltySpec& spec,
                                   const StencilFamily& family,
                                   std::span<const Stencil> binomials);

/// One solve against the aggregate multi-order penalty
/// (spec.mode == simultaneous).
std::vector<double> smooth_simultaneous(std::span<const double> curve,
                                        const PenaltySpec& spec,
                                        const StencilFamily& family,
                                        std::span<const Stencil> binomials);

}  // namespace gridsmooth
