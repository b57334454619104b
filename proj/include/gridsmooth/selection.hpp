#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gridsmooth/smoother.hpp"

namespace gridsmooth {

/// Outcome of a grid search for the regularization strength.
struct SelectionResult {
  double alpha_hat = 0.0;
  double score = 0.0;
  std::vector<std::pair<double, double>> grid;  // evaluated (alpha, score)
  double effective_df = 0.0;                    // tr S at alpha_hat
};

/// GCV score ||(I - S) x||^2 / (d - tr S)^2. Throws degenerate_denominator
/// when tr S is numerically d (alpha = 0 or P = 0). Residuals at the
/// rounding level of the solve count as exactly zero, so curves in the
/// penalty null space score 0 across the whole grid.
double gcv_score(std::span<const double> curve, const Smoother& smoother);

/// Evaluate a positive alpha grid against one penalty; ties break toward
/// the smallest alpha.
SelectionResult select_alpha(std::span<const double> curve, const PenaltyMatrix& penalty,
                             std::span<const double> alpha_grid);

struct SequentialSelection {
  std::vector<SelectionResult> steps;  // aligned with spec.orders (R down to 1)
  std::vector<double> output;
};

/// Step-wise GCV for the sequential scheme: at each order the score is
/// taken against the current input, then the estimate advances.
SequentialSelection select_sequential(std::span<const double> curve,
                                      const PenaltySpec& spec,
                                      std::span<const std::vector<double>> grids,
                                      const StencilFamily& family,
                                      std::span<const Stencil> binomials);

struct SimultaneousSelection {
  std::vector<double> alphas;  // aligned with spec.orders
  double score = 0.0;
  double effective_df = 0.0;
  std::vector<double> output;
};

/// Joint GCV over the aggregate penalty: full Cartesian product for up to
/// two orders, coordinate descent (two sweeps) beyond that.
SimultaneousSelection select_simultaneous(std::span<const double> curve,
                                          const PenaltySpec& spec,
                                          std::span<const std::vector<double>> grids,
                                          const StencilFamily& family,
                                          std::span<const Stencil> binomials);

struct OracleResult {
  std::size_t best_index = 0;
  double mse = 0.0;  // ||estimate - truth||^2 / d
};

/// Exhaustive tuning against known ground truth (benchmarking only).
/// apply_candidate(i, curve) produces the i-th candidate estimate.
OracleResult oracle_select(
    std::span<const double> curve, std::span<const double> truth, std::size_t n_candidates,
    const std::function<std::vector<double>(std::size_t, std::span<const double>)>&
        apply_candidate);

/// Blend weight suggestion from the lag-1 autocorrelation of the first
/// difference: near-white differenced curves push toward the calibrated
/// penalty (eta -> 1), strong positive dependence toward the standard one.
double eta_heuristic(std::span<const double> curve);

/// count points, logarithmically spaced over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

/// Default GCV grid: 40 points over [1e-4, 1e4].
std::vector<double> default_alpha_grid();

}  // namespace gridsmooth
