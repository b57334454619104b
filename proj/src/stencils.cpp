#include "gridsmooth/stencils.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gridsmooth/kernels.hpp"

namespace gridsmooth {

namespace {

constexpr double kNullSpaceTol = 1e-9;  // relative singular value threshold
constexpr double kZeroSnapTol = 1e-12;  // snap solver noise to exact zeros

void normalize_and_fix_sign(std::vector<double>& w) {
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (norm == 0.0) throw numeric_error("stencil: zero weight vector");
  for (double& v : w) v /= norm;
  double max_abs = 0.0;
  for (double v : w) max_abs = std::max(max_abs, std::fabs(v));
  for (double& v : w) {
    if (std::fabs(v) < kZeroSnapTol * max_abs) v = 0.0;
  }
  // leftmost nonzero weight positive
  for (double v : w) {
    if (v != 0.0) {
      if (v < 0.0)
        for (double& u : w) u = -u;
      break;
    }
  }
}

Stencil make_stencil(int order, int half_width, std::vector<double> w) {
  normalize_and_fix_sign(w);
  return Stencil{order, half_width, std::move(w)};
}

Stencil impulse(int order, int half_width) {
  std::vector<double> w(2 * static_cast<std::size_t>(half_width) + 1, 0.0);
  w[static_cast<std::size_t>(half_width)] = 1.0;
  return Stencil{order, half_width, std::move(w)};
}

// Reduced coordinates under the parity constraint w_l = (-1)^r w_{-l}:
// even orders are determined by (w_0 .. w_L), odd orders by (w_1 .. w_L)
// with w_0 = 0.
struct ReducedBasis {
  int L;
  bool even;

  int size() const { return even ? L + 1 : L; }
  int offset(int idx) const { return even ? idx : idx + 1; }

  std::vector<double> expand(const Eigen::VectorXd& u) const {
    std::vector<double> w(2 * static_cast<std::size_t>(L) + 1, 0.0);
    for (int i = 0; i < size(); ++i) {
      const int l = offset(i);
      w[static_cast<std::size_t>(L + l)] = u(i);
      if (l > 0) w[static_cast<std::size_t>(L - l)] = even ? u(i) : -u(i);
    }
    return w;
  }
};

// Columns of the returned matrix span the null space of C (SVD with a
// relative singular-value cutoff).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& c) {
  const auto cols = c.cols();
  if (c.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() ? sv(0) * kNullSpaceTol : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

Stencil solve_at_width(int order, int L, const StencilFamily& lower) {
  const ReducedBasis rb{L, order % 2 == 0};
  const int n = rb.size();
  if (n == 0)
    throw infeasible_width("solve_stencil: no admissible weights at half_width " +
                           std::to_string(L));

  std::vector<Eigen::RowVectorXd> rows;
  auto add_row = [&](const Eigen::RowVectorXd& r) { rows.push_back(r); };

  if (rb.even) {
    // zero sum (automatic for odd orders)
    Eigen::RowVectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = rb.offset(i) == 0 ? 1.0 : 2.0;
    add_row(r);
  }
  // vanishing moments below the order; only moments matching the parity of
  // the order are not already implied by symmetry
  for (int k = 1; k < order; ++k) {
    if (k % 2 != order % 2) continue;
    Eigen::RowVectorXd r(n);
    for (int i = 0; i < n; ++i) {
      const int l = rb.offset(i);
      r(i) = l == 0 ? 0.0 : 2.0 * std::pow(static_cast<double>(l), k);
    }
    add_row(r);
  }
  // orthogonality to lower orders of the same parity (opposite parity is
  // automatic under the parity constraint)
  for (int s = 0; s < order; ++s) {
    const Stencil& v = lower.member(s);
    if (s % 2 != order % 2) continue;
    Eigen::RowVectorXd r(n);
    for (int i = 0; i < n; ++i) {
      const int l = rb.offset(i);
      r(i) = (l == 0) ? v.weight(0) : 2.0 * v.weight(l);
    }
    add_row(r);
  }

  Eigen::MatrixXd c(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) c.row(static_cast<Eigen::Index>(i)) = rows[i];

  Eigen::MatrixXd basis = null_space(c);
  if (basis.cols() == 0)
    throw infeasible_width("solve_stencil: infeasible at order " + std::to_string(order) +
                           ", half_width " + std::to_string(L));

  // Selection rule for multi-dimensional solution spaces: force zeros at
  // offsets of increasing |l|, keeping each constraint only when some
  // solution survives, until one dimension remains.
  if (basis.cols() > 1) {
    for (int i = 0; i < n && basis.cols() > 1; ++i) {
      Eigen::MatrixXd c2(c.rows() + 1, n);
      c2.topRows(c.rows()) = c;
      c2.bottomRows(1).setZero();
      c2(c.rows(), i) = 1.0;
      Eigen::MatrixXd basis2 = null_space(c2);
      if (basis2.cols() >= 1) {
        c = std::move(c2);
        basis = std::move(basis2);
      }
    }
    if (basis.cols() > 1)
      throw non_unique_solution(static_cast<int>(basis.cols()),
                                "solve_stencil: solution space has dimension " +
                                    std::to_string(basis.cols()));
  }

  return make_stencil(order, L, rb.expand(basis.col(0)));
}

}  // namespace

const Stencil& StencilFamily::member(int order) const {
  if (order < 0 || order > max_order || order >= static_cast<int>(members.size()))
    throw invalid_parameter("StencilFamily: no member of order " + std::to_string(order));
  return members[static_cast<std::size_t>(order)];
}

StencilFamily canonical_family(int max_order) {
  if (max_order < 0)
    throw invalid_parameter("canonical_family: max_order must be nonnegative");
  if (max_order > kMaxSupportedOrder)
    throw unsupported_order("canonical_family: orders above " +
                            std::to_string(kMaxSupportedOrder) +
                            " have no unique calibrated stencil");
  static const std::vector<std::vector<double>> kRows = {
      {1},
      {1, 0, -1},
      {1, -1, 0, -1, 1},
      {2, -3, 0, 0, 0, 3, -2},
      {7, -16, 9, 0, 0, 0, 0, 0, 9, -16, 7},
  };
  StencilFamily family;
  family.max_order = max_order;
  for (int r = 0; r <= max_order; ++r)
    family.members.push_back(make_stencil(r, kMinimalHalfWidth[static_cast<std::size_t>(r)],
                                          kRows[static_cast<std::size_t>(r)]));
  return family;
}

Stencil solve_stencil(int order, int half_width, const StencilFamily& lower_orders,
                      bool auto_widen) {
  if (order < 0) throw invalid_parameter("solve_stencil: order must be nonnegative");
  if (half_width < 0) throw invalid_parameter("solve_stencil: half_width must be nonnegative");
  if (order == 0) return impulse(0, half_width);
  if (lower_orders.max_order < order - 1 ||
      static_cast<int>(lower_orders.members.size()) < order)
    throw invalid_parameter("solve_stencil: family must contain orders 0.." +
                            std::to_string(order - 1));

  constexpr int kMaxWiden = 16;
  for (int L = half_width;; ++L) {
    try {
      return solve_at_width(order, L, lower_orders);
    } catch (const infeasible_width&) {
      if (!auto_widen || L - half_width >= kMaxWiden) throw;
    }
  }
}

Stencil binomial_stencil(int order) {
  if (order < 0) throw invalid_parameter("binomial_stencil: order must be nonnegative");
  if (order == 0) return impulse(0, 0);
  const int L = (order + 1) / 2;
  std::vector<double> w(2 * static_cast<std::size_t>(L) + 1, 0.0);
  // taps at offsets -ceil(order/2) .. -ceil(order/2)+order
  double coeff = 1.0;
  for (int k = 0; k <= order; ++k) {
    w[static_cast<std::size_t>(k)] = (k % 2 == 0) ? coeff : -coeff;
    coeff = coeff * (order - k) / (k + 1);
  }
  return make_stencil(order, L, std::move(w));
}

std::vector<Stencil> binomial_stencils(int max_order) {
  std::vector<Stencil> out;
  for (int r = 0; r <= max_order; ++r) out.push_back(binomial_stencil(r));
  return out;
}

std::vector<double> apply_stencil(const Stencil& stencil, std::span<const double> curve) {
  const std::size_t support = 2 * static_cast<std::size_t>(stencil.half_width) + 1;
  if (curve.size() < support)
    throw curve_too_short("apply: curve of length " + std::to_string(curve.size()) +
                          " is shorter than stencil support " + std::to_string(support));
  std::vector<double> out(curve.size() - support + 1);
  kernels::convolve_valid(curve, stencil.weights, out);
  return out;
}

double cross_covariance(const Stencil& a, const Stencil& b) {
  const int L = std::min(a.half_width, b.half_width);
  double s = 0.0;
  for (int l = -L; l <= L; ++l) s += a.weight(l) * b.weight(l);
  return s;
}

std::string Stencil::serialize() const {
  std::string out = std::to_string(order) + " " + std::to_string(half_width);
  char buf[40];
  for (double v : weights) {
    std::snprintf(buf, sizeof(buf), " %.17g", v);
    out += buf;
  }
  return out;
}

Stencil Stencil::parse(const std::string& line) {
  std::istringstream in(line);
  Stencil s;
  if (!(in >> s.order >> s.half_width) || s.half_width < 0)
    throw parse_error("stencil: malformed header in '" + line + "'");
  double v;
  while (in >> v) s.weights.push_back(v);
  if (static_cast<int>(s.weights.size()) != 2 * s.half_width + 1)
    throw parse_error("stencil: expected " + std::to_string(2 * s.half_width + 1) +
                      " weights, got " + std::to_string(s.weights.size()));
  return s;
}

}  // namespace gridsmooth
