#include "gridsmooth/selection.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "gridsmooth/kernels.hpp"

namespace gridsmooth {

namespace {

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw invalid_parameter("selection: empty alpha grid");
  for (double a : grid)
    if (!(a > 0.0) || !std::isfinite(a))
      throw invalid_parameter("selection: alpha grid entries must be positive");
}

}  // namespace

double gcv_score(std::span<const double> curve, const Smoother& smoother) {
  const int d = smoother.dim();
  if (static_cast<int>(curve.size()) != d)
    throw invalid_parameter("gcv_score: curve length does not match smoother dim");
  const double denom = d - smoother.trace();
  if (denom <= 1e-12 * d)
    throw degenerate_denominator("gcv_score: tr S = d (no smoothing applied)");

  const std::vector<double> fitted = smoother.apply(curve);
  double rss = kernels::sum_sq_diff(curve, fitted);

  // Solve roundoff floor: a residual this small is indistinguishable from a
  // null-space input, so treat it as exactly zero.
  const double rel_floor = 16.0 * DBL_EPSILON *
                           (1.0 + smoother.alpha() * smoother.penalty_inf_norm()) *
                           std::sqrt(static_cast<double>(d));
  if (rss <= rel_floor * rel_floor * kernels::sum_sq(curve)) rss = 0.0;

  return rss / (denom * denom);
}

SelectionResult select_alpha(std::span<const double> curve, const PenaltyMatrix& penalty,
                             std::span<const double> alpha_grid) {
  check_grid(alpha_grid);
  SelectionResult result;
  result.grid.reserve(alpha_grid.size());
  bool have_best = false;
  for (double alpha : alpha_grid) {
    const Smoother s = Smoother::make(penalty, alpha);
    const double score = gcv_score(curve, s);
    result.grid.emplace_back(alpha, score);
    const bool better = !have_best || score < result.score ||
                        (score == result.score && alpha < result.alpha_hat);
    if (better) {
      have_best = true;
      result.alpha_hat = alpha;
      result.score = score;
      result.effective_df = s.trace();
    }
  }
  return result;
}

SequentialSelection select_sequential(std::span<const double> curve,
                                      const PenaltySpec& spec,
                                      std::span<const std::vector<double>> grids,
                                      const StencilFamily& family,
                                      std::span<const Stencil> binomials) {
  spec.validate();
  if (spec.mode != PenaltyMode::sequential)
    throw invalid_parameter("select_sequential: spec mode must be sequential");
  if (grids.size() != spec.orders.size())
    throw invalid_parameter("select_sequential: one grid per order required");

  const int d = static_cast<int>(curve.size());
  SequentialSelection out;
  std::vector<double> f(curve.begin(), curve.end());
  for (std::size_t i = 0; i < spec.orders.size(); ++i) {
    const PenaltyMatrix p = blended_penalty(family, binomials, spec.orders[i], spec.eta, d);
    SelectionResult step = select_alpha(f, p, grids[i]);
    f = Smoother::make(p, step.alpha_hat).apply(f);
    out.steps.push_back(std::move(step));
  }
  out.output = std::move(f);
  return out;
}

SimultaneousSelection select_simultaneous(std::span<const double> curve,
                                          const PenaltySpec& spec,
                                          std::span<const std::vector<double>> grids,
                                          const StencilFamily& family,
                                          std::span<const Stencil> binomials) {
  spec.validate();
  if (spec.mode != PenaltyMode::simultaneous)
    throw invalid_parameter("select_simultaneous: spec mode must be simultaneous");
  if (grids.size() != spec.orders.size())
    throw invalid_parameter("select_simultaneous: one grid per order required");
  for (const auto& g : grids) check_grid(g);

  const std::size_t n_orders = spec.orders.size();
  PenaltySpec work = spec;

  auto evaluate = [&](const std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < n_orders; ++i) work.alphas[i] = grids[i][idx[i]];
    const PenaltyMatrix p =
        aggregate(family, binomials, work, static_cast<int>(curve.size()));
    return gcv_score(curve, Smoother::make(p, 1.0));
  };

  std::vector<std::size_t> best_idx(n_orders, 0);

  if (n_orders <= 2) {
    // full Cartesian product
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(n_orders, 0);
    bool done = false;
    while (!done) {
      const double score = evaluate(idx);
      if (score < best_score) {
        best_score = score;
        best_idx = idx;
      }
      std::size_t k = 0;
      for (;;) {
        if (k == n_orders) {
          done = true;
          break;
        }
        if (++idx[k] < grids[k].size()) break;
        idx[k] = 0;
        ++k;
      }
    }
  } else {
    // coordinate descent, two sweeps
    std::vector<std::size_t> idx(n_orders, 0);
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t i = 0; i < n_orders; ++i) {
        double coord_best = std::numeric_limits<double>::infinity();
        std::size_t coord_arg = idx[i];
        for (std::size_t j = 0; j < grids[i].size(); ++j) {
          idx[i] = j;
          const double score = evaluate(idx);
          if (score < coord_best) {
            coord_best = score;
            coord_arg = j;
          }
        }
        idx[i] = coord_arg;
      }
    }
    best_idx = idx;
  }

  SimultaneousSelection out;
  out.alphas.resize(n_orders);
  for (std::size_t i = 0; i < n_orders; ++i) out.alphas[i] = grids[i][best_idx[i]];
  work.alphas = out.alphas;
  const PenaltyMatrix chosen =
      aggregate(family, binomials, work, static_cast<int>(curve.size()));
  const Smoother s = Smoother::make(chosen, 1.0);
  out.score = gcv_score(curve, s);
  out.effective_df = s.trace();
  out.output = s.apply(curve);
  return out;
}

OracleResult oracle_select(
    std::span<const double> curve, std::span<const double> truth, std::size_t n_candidates,
    const std::function<std::vector<double>(std::size_t, std::span<const double>)>&
        apply_candidate) {
  if (truth.size() != curve.size())
    throw invalid_parameter("oracle_select: truth length does not match curve");
  if (n_candidates == 0) throw invalid_parameter("oracle_select: empty candidate set");
  OracleResult best;
  best.mse = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_candidates; ++i) {
    const std::vector<double> est = apply_candidate(i, curve);
    const double mse = kernels::sum_sq_diff(est, truth) / static_cast<double>(truth.size());
    if (mse < best.mse) {
      best.mse = mse;
      best.best_index = i;
    }
  }
  return best;
}

double eta_heuristic(std::span<const double> curve) {
  const std::size_t d = curve.size();
  if (d < 3) throw invalid_parameter("eta_heuristic: need at least 3 points");
  std::vector<double> diff(d - 1);
  for (std::size_t t = 0; t + 1 < d; ++t) diff[t] = curve[t + 1] - curve[t];
  double mean = 0.0;
  for (double v : diff) mean += v;
  mean /= static_cast<double>(diff.size());
  double var = 0.0, cov = 0.0, scale = 0.0;
  for (std::size_t t = 0; t < diff.size(); ++t) {
    const double c = diff[t] - mean;
    var += c * c;
    scale += diff[t] * diff[t];
    if (t + 1 < diff.size()) cov += c * (diff[t + 1] - mean);
  }
  // a (numerically) constant differenced curve carries no dependence signal
  if (var <= 1e-24 * std::max(1.0, scale)) return 1.0;
  const double rho = cov / var;
  return std::clamp(-2.0 * rho, 0.0, 1.0);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1)
    throw invalid_parameter("log_grid: need 0 < lo <= hi and count >= 1");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (int i = 0; i < count; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::pow(10.0, llo + (lhi - llo) * i / (count - 1));
  return grid;
}

std::vector<double> default_alpha_grid() { return log_grid(1e-4, 1e4, 40); }

}  // namespace gridsmooth
