#pragma once

#include <span>
#include <vector>

#include "gridsmooth/stencils.hpp"

namespace gridsmooth {

/// Symmetric positive semi-definite banded matrix encoding roughness.
/// Stored by upper diagonals: entry(i, i+k) lives at diagonals[k*dim + i]
/// for 0 <= k <= band_half_width.
struct PenaltyMatrix {
  int dim = 0;
  int band_half_width = 0;
  std::vector<double> diagonals;

  double at(int i, int j) const;
  void matvec(std::span<const double> x, std::span<double> y) const;
  double quad_form(std::span<const double> x) const;
  double inf_norm() const;

  /// this += scale * other (band widened as needed; dims must match).
  void add_scaled(const PenaltyMatrix& other, double scale);

  /// Dense row-major copy (dim x dim), mainly for diagnostics and tests.
  std::vector<double> to_dense() const;
};

enum class PenaltyMode { single, sequential, simultaneous };

/// Multi-order penalty description: which derivative orders participate,
/// the blend weight eta between standard and calibrated penalties, and one
/// alpha per order.
struct PenaltySpec {
  std::vector<int> orders;
  double eta = 1.0;
  std::vector<double> alphas;
  PenaltyMode mode = PenaltyMode::single;

  void validate() const;
};

/// P = D^T D where D applies the stencil on every interior row
/// t in {L+1, ..., dim-L}; band half-width 2L.
PenaltyMatrix penalty_from_stencil(const Stencil& stencil, int dim);

/// (1 - eta) * standard + eta * calibrated.
PenaltyMatrix blend(const PenaltyMatrix& standard, const PenaltyMatrix& calibrated,
                    double eta);

/// Squared Euclidean norm of the raw alternating binomial row of the given
/// order (the central binomial coefficient C(2r, r)). Blends and aggregates
/// scale the standard penalty by this factor so that it matches the classical
/// raw-weight difference operator; stencils themselves stay unit-norm.
double binomial_raw_norm_sq(int order);

/// Order-r blended penalty:
/// (1-eta) * D_r^T D_r (raw-weight scale) + eta * Dbar_r^T Dbar_r.
PenaltyMatrix blended_penalty(const StencilFamily& family,
                              std::span<const Stencil> binomials, int order,
                              double eta, int dim);

/// Aggregate multi-order penalty:
/// sum_r alpha_r * { (1-eta) D_r^T D_r + eta Dbar_r^T Dbar_r }
/// with the same raw-weight scale on the standard part.
PenaltyMatrix aggregate(const StencilFamily& family, std::span<const Stencil> binomials,
                        const PenaltySpec& spec, int dim);

}  // namespace gridsmooth
