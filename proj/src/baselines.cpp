#include "gridsmooth/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "gridsmooth/kernels.hpp"

namespace gridsmooth {

namespace {

constexpr int kSplineDegree = 3;

// 7-point Gauss-Legendre rule on [-1, 1]
constexpr double kGlNodes[7] = {
    -0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0,
    0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
constexpr double kGlWeights[7] = {
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189, 0.4179591836734694,
    0.3818300505051189, 0.2797053914892766, 0.1294849661688697};

int find_span(double x, int p, int m, const std::vector<double>& knots) {
  if (x >= knots[static_cast<std::size_t>(m)]) return m - 1;
  if (x <= knots[static_cast<std::size_t>(p)]) return p;
  int lo = p, hi = m, mid = (lo + hi) / 2;
  while (x < knots[static_cast<std::size_t>(mid)] ||
         x >= knots[static_cast<std::size_t>(mid + 1)]) {
    if (x < knots[static_cast<std::size_t>(mid)])
      hi = mid;
    else
      lo = mid;
    mid = (lo + hi) / 2;
  }
  return mid;
}

// All p+1 nonzero basis values at x (Cox-de Boor triangular recurrence).
void basis_funs(int span, double x, int p, const std::vector<double>& knots, double* out) {
  double left[kSplineDegree + 1], right[kSplineDegree + 1];
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

// Derivatives 0..nder of the p+1 nonzero basis functions at x;
// ders[k*(p+1) + j] is the k-th derivative of basis (span - p + j).
void ders_basis_funs(int span, double x, int p, int nder, const std::vector<double>& knots,
                     double* ders) {
  const int np = p + 1;
  double ndu[kSplineDegree + 1][kSplineDegree + 1];
  double a[2][kSplineDegree + 1];
  double left[kSplineDegree + 1], right[kSplineDegree + 1];

  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) ders[0 * np + j] = ndu[j][p];

  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nder; ++k) {
      double der = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        der = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        der += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        der += a[s2][k] * ndu[r][pk];
      }
      ders[k * np + r] = der;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= nder; ++k) {
    for (int j = 0; j <= p; ++j) ders[k * np + j] *= factor;
    factor *= (p - k);
  }
}

std::vector<double> clamped_uniform_knots(int n_basis) {
  const int p = kSplineDegree;
  const int interior = n_basis - p - 1;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(n_basis + p + 1));
  for (int i = 0; i <= p; ++i) knots.push_back(0.0);
  for (int i = 1; i <= interior; ++i)
    knots.push_back(static_cast<double>(i) / (interior + 1));
  for (int i = 0; i <= p; ++i) knots.push_back(1.0);
  return knots;
}

}  // namespace

BasisSmoother::BasisSmoother(BasisKind kind, int n_basis, int penalty_order, int dim)
    : kind_(kind), n_basis_(n_basis), penalty_order_(penalty_order), dim_(dim) {
  if (dim < 2) throw invalid_parameter("basis: need dim >= 2");
  if (n_basis < 1 || n_basis > dim)
    throw invalid_parameter("basis: need 1 <= n_basis <= dim");
  if (penalty_order < 0) throw invalid_parameter("basis: penalty order must be nonnegative");

  const std::size_t m = static_cast<std::size_t>(n_basis);
  design_.assign(static_cast<std::size_t>(dim) * m, 0.0);
  penalty_.assign(m * m, 0.0);

  if (kind == BasisKind::fourier) {
    // column 0 constant, then sqrt(2) sin / cos pairs at frequencies 1, 2, ...
    for (int i = 0; i < dim; ++i) {
      const double t = static_cast<double>(i + 1) / dim;
      design_[static_cast<std::size_t>(i) * m + 0] = 1.0;
      for (int j = 1; j < n_basis; ++j) {
        const int k = (j + 1) / 2;
        const double phase = 2.0 * std::numbers::pi * k * t;
        design_[static_cast<std::size_t>(i) * m + j] =
            std::numbers::sqrt2 * ((j % 2 == 1) ? std::sin(phase) : std::cos(phase));
      }
    }
    for (int j = 1; j < n_basis; ++j) {
      const int k = (j + 1) / 2;
      penalty_[static_cast<std::size_t>(j) * m + j] =
          std::pow(2.0 * std::numbers::pi * k, 2.0 * penalty_order);
    }
  } else {
    const int p = kSplineDegree;
    if (n_basis < p + 1)
      throw invalid_parameter("basis: cubic splines require n_basis >= 4");
    if (penalty_order > p)
      throw invalid_parameter("basis: penalty order exceeds spline degree");
    const std::vector<double> knots = clamped_uniform_knots(n_basis);

    double nv[kSplineDegree + 1];
    for (int i = 0; i < dim; ++i) {
      const double t = static_cast<double>(i + 1) / dim;
      const int span = find_span(t, p, n_basis, knots);
      basis_funs(span, t, p, knots, nv);
      for (int j = 0; j <= p; ++j)
        design_[static_cast<std::size_t>(i) * m + (span - p + j)] = nv[j];
    }

    double ders[(kSplineDegree + 1) * (kSplineDegree + 1)];
    for (int span = p; span < n_basis; ++span) {
      const double lo = knots[static_cast<std::size_t>(span)];
      const double hi = knots[static_cast<std::size_t>(span + 1)];
      if (hi <= lo) continue;
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (int q = 0; q < 7; ++q) {
        const double x = mid + half * kGlNodes[q];
        const double w = kGlWeights[q] * half;
        ders_basis_funs(span, x, p, penalty_order_, knots, ders);
        const double* dp = ders + penalty_order_ * (p + 1);
        for (int a = 0; a <= p; ++a)
          for (int b = 0; b <= p; ++b)
            penalty_[static_cast<std::size_t>(span - p + a) * m + (span - p + b)] +=
                w * dp[a] * dp[b];
      }
    }
  }

  // cache B^T B
  btb_.assign(m * m, 0.0);
  for (int i = 0; i < dim; ++i) {
    const double* row = design_.data() + static_cast<std::size_t>(i) * m;
    for (std::size_t a = 0; a < m; ++a) {
      if (row[a] == 0.0) continue;
      for (std::size_t b = 0; b < m; ++b) btb_[a * m + b] += row[a] * row[b];
    }
  }
}

std::vector<double> BasisSmoother::fit(std::span<const double> curve, double alpha) const {
  if (static_cast<int>(curve.size()) != dim_)
    throw invalid_parameter("basis fit: curve length does not match dim");
  if (!(alpha >= 0.0)) throw invalid_parameter("basis fit: alpha must be nonnegative");

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      design(design_.data(), dim_, n_basis_);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      btb(btb_.data(), n_basis_, n_basis_);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      omega(penalty_.data(), n_basis_, n_basis_);
  Eigen::Map<const Eigen::VectorXd> x(curve.data(), dim_);

  Eigen::MatrixXd system = btb + alpha * omega;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success)
    throw numeric_error("basis fit: singular normal equations");
  const Eigen::VectorXd coef = llt.solve(design.transpose() * x);
  const Eigen::VectorXd fitted = design * coef;
  return {fitted.data(), fitted.data() + dim_};
}

double BasisSmoother::effective_df(double alpha) const {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      btb(btb_.data(), n_basis_, n_basis_);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      omega(penalty_.data(), n_basis_, n_basis_);
  Eigen::MatrixXd system = btb + alpha * omega;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success)
    throw numeric_error("basis df: singular normal equations");
  return llt.solve(Eigen::MatrixXd(btb)).trace();
}

std::vector<double> fit_basis(BasisKind kind, int n_basis, int penalty_order, double alpha,
                              std::span<const double> curve) {
  return BasisSmoother(kind, n_basis, penalty_order, static_cast<int>(curve.size()))
      .fit(curve, alpha);
}

KernelSmoother::KernelSmoother(int dim, double bandwidth)
    : dim_(dim), bandwidth_(bandwidth) {
  if (dim < 1) throw invalid_parameter("kernel: need dim >= 1");
  if (!(bandwidth > 0.0)) throw invalid_parameter("kernel: bandwidth must be positive");
  weights_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth * dim * static_cast<double>(dim));
  for (int t = 0; t < dim; ++t) {
    double* row = weights_.data() + static_cast<std::size_t>(t) * dim;
    double sum = 0.0;
    for (int s = 0; s < dim; ++s) {
      const double delta = static_cast<double>(t - s);
      row[s] = std::exp(-delta * delta * inv2h2);
      sum += row[s];
    }
    for (int s = 0; s < dim; ++s) row[s] /= sum;
  }
}

std::vector<double> KernelSmoother::apply(std::span<const double> curve) const {
  if (static_cast<int>(curve.size()) != dim_)
    throw invalid_parameter("kernel: curve length does not match dim");
  std::vector<double> out(static_cast<std::size_t>(dim_));
  kernels::matvec(weights_, static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_),
                  curve, out);
  return out;
}

std::vector<double> kernel_smooth(std::span<const double> curve, double bandwidth) {
  return KernelSmoother(static_cast<int>(curve.size()), bandwidth).apply(curve);
}

}  // namespace gridsmooth
