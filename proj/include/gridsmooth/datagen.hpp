#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gridsmooth/errors.hpp"

namespace gridsmooth {

/// n curves on a common d-point grid, row-major, with an optional shared
/// ground truth.
struct CurveBatch {
  int n = 0;
  int d = 0;
  std::vector<double> values;  // n * d, row-major
  std::optional<std::vector<double>> truth;
  std::uint64_t seed = 0;

  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
  }
  std::span<double> row(int i) {
    return {values.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
  }
};

enum class NoiseDistribution { gaussian, laplace, student_t };

/// Mixture of an i.i.d. component and a cumulative (integrated) component,
/// each standardized to unit variance analytically; the mixture is rescaled
/// to unit marginal variance at the last grid point, then multiplied by sigma.
struct NoiseSpec {
  NoiseDistribution distribution = NoiseDistribution::gaussian;
  double dof = 5.0;  // Student-t only; must exceed 2
  double mix_white = 0.7;
  double mix_cumulative = 0.3;
  double sigma = 1.0;

  void validate() const;
};

/// Curve with heterogeneous local regularity: softplus of white noise run
/// through a centred moving average of width max(3, round(d/20)) with
/// reflected boundaries. Deterministic per seed.
std::vector<double> irregular_curve(int d, std::uint64_t seed);

/// f_t = sin(6 pi t / d), t = 1..d.
std::vector<double> sinusoid(int d);

/// One noise path of length d under the given spec.
std::vector<double> noise(int d, const NoiseSpec& spec, std::uint64_t seed);

/// n Gaussian-process paths on t = (1..d)/d: squared-exponential covariance
/// around a sinusoidal mean, plus i.i.d. Gaussian measurement noise. The
/// truth field holds the mean. Rows draw from per-row substreams, so batch
/// generation is schedule-independent.
CurveBatch gp_batch(int n, int d, double kernel_lengthscale, double noise_sd,
                    std::uint64_t seed, double amplitude = 1.0);

}  // namespace gridsmooth
