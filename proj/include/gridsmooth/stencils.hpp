#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "gridsmooth/errors.hpp"

namespace gridsmooth {

// Finite difference stencils. Two families are built here:
//
//  * calibrated stencils: unit-norm weight vectors that, applied to white
//    noise, produce unit-variance outputs uncorrelated (at a common grid
//    location) with the outputs of every lower order. Orders 0..4 admit a
//    unique such stencil at their minimal half-widths; order 5 does not.
//
//  * binomial stencils: classical alternating-sign Pascal rows, normalized,
//    used in the standard difference penalty they are contrasted with.

/// Signed weight vector of half-width L indexed by offsets -L..L.
/// Unit Euclidean norm; the leftmost nonzero weight is positive.
struct Stencil {
  int order = 0;
  int half_width = 0;
  std::vector<double> weights;  // size 2*half_width + 1

  /// Weight at a signed offset; zero outside the support.
  double weight(int offset) const {
    if (offset < -half_width || offset > half_width) return 0.0;
    return weights[static_cast<std::size_t>(offset + half_width)];
  }

  /// One-line text form: "order L w_-L ... w_L" (17 significant digits).
  std::string serialize() const;
  static Stencil parse(const std::string& line);
};

/// Calibrated stencils for orders 0..max_order, each at its minimal
/// admissible half-width.
struct StencilFamily {
  int max_order = 0;
  std::vector<Stencil> members;  // index = order

  const Stencil& member(int order) const;
};

inline constexpr int kMaxSupportedOrder = 4;

/// Minimal admissible half-widths of the calibrated stencils, orders 0..4.
inline constexpr std::array<int, 5> kMinimalHalfWidth{0, 1, 2, 3, 5};

/// The canonical calibrated family for orders 0..max_order (max_order <= 4).
StencilFamily canonical_family(int max_order);

/// Construct the order-r calibrated stencil at the given half-width by
/// solving the constraint system {orthogonality to all lower orders,
/// zero sum, parity, vanishing moments below r}. When the solution space
/// is multi-dimensional, contiguous central zeros are imposed outward from
/// the centre until one dimension remains. With auto_widen, infeasible
/// widths are widened until a solution exists.
Stencil solve_stencil(int order, int half_width, const StencilFamily& lower_orders,
                      bool auto_widen = false);

/// Normalized alternating-sign binomial stencil of the given order.
/// Even orders are centred; odd orders occupy the left part of a window of
/// half-width ceil(order/2), with the remainder zero.
Stencil binomial_stencil(int order);

/// Binomial stencils for orders 0..max_order (index = order).
std::vector<Stencil> binomial_stencils(int max_order);

/// Valid (interior-only) correlation of the stencil with a curve;
/// output length d - 2L. Throws curve_too_short when d < 2L + 1.
std::vector<double> apply_stencil(const Stencil& stencil, std::span<const double> curve);

/// Zero-padded inner product of two weight vectors aligned at their centres;
/// equals the covariance of same-location outputs under white noise.
double cross_covariance(const Stencil& a, const Stencil& b);

}  // namespace gridsmooth
