#include "gridsmooth/datagen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "gridsmooth/rng.hpp"

namespace gridsmooth {

namespace {

// substream tags (documented stream layout: one stream per purpose and row)
constexpr std::uint64_t kTagIrregular = 0x1001;
constexpr std::uint64_t kTagNoiseWhite = 0x1002;
constexpr std::uint64_t kTagNoiseCumulative = 0x1003;
constexpr std::uint64_t kTagGpRow = 0x1004;

double softplus(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

int reflect_index(int i, int d) {
  while (i < 0 || i >= d) {
    if (i < 0) i = -i - 1;
    if (i >= d) i = 2 * d - 1 - i;
  }
  return i;
}

double standardized_draw(rng::Xoshiro256pp& gen, const NoiseSpec& spec) {
  switch (spec.distribution) {
    case NoiseDistribution::gaussian:
      return gen.normal();
    case NoiseDistribution::laplace:
      return gen.laplace_std();
    case NoiseDistribution::student_t:
      return gen.student_t_std(spec.dof);
  }
  throw invalid_parameter("noise: unknown distribution");
}

}  // namespace

void NoiseSpec::validate() const {
  if (!(mix_white >= 0.0) || !(mix_cumulative >= 0.0))
    throw invalid_parameter("noise: mixture weights must be nonnegative");
  if (std::fabs(mix_white + mix_cumulative - 1.0) > 1e-12)
    throw invalid_parameter("noise: mixture weights must sum to 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw invalid_parameter("noise: sigma must be finite and nonnegative");
  if (distribution == NoiseDistribution::student_t && !(dof > 2.0))
    throw invalid_parameter("noise: student_t requires dof > 2");
}

std::vector<double> irregular_curve(int d, std::uint64_t seed) {
  if (d < 8) throw invalid_parameter("irregular_curve: need d >= 8");
  auto gen = rng::Xoshiro256pp::stream(seed, kTagIrregular);
  std::vector<double> z(static_cast<std::size_t>(d));
  for (double& v : z) v = gen.normal();

  const int window = std::max(3, static_cast<int>(std::lround(d / 20.0)));
  const int left = window / 2;
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int t = 0; t < d; ++t) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j)
      acc += z[static_cast<std::size_t>(reflect_index(t - left + j, d))];
    out[static_cast<std::size_t>(t)] = softplus(acc / window);
  }
  return out;
}

std::vector<double> sinusoid(int d) {
  if (d < 2) throw invalid_parameter("sinusoid: need d >= 2");
  std::vector<double> f(static_cast<std::size_t>(d));
  for (int t = 1; t <= d; ++t)
    f[static_cast<std::size_t>(t - 1)] =
        std::sin(6.0 * std::numbers::pi * t / static_cast<double>(d));
  return f;
}

std::vector<double> noise(int d, const NoiseSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (d < 1) throw invalid_parameter("noise: need d >= 1");
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  if (spec.sigma == 0.0) return out;

  auto gen_white = rng::Xoshiro256pp::stream(seed, kTagNoiseWhite);
  auto gen_cum = rng::Xoshiro256pp::stream(seed, kTagNoiseCumulative);

  const double w0 = spec.mix_white;
  const double w1 = spec.mix_cumulative;
  // unit marginal variance at t = d: var(w0 e0 + w1 e1_d) = w0^2 + w1^2
  const double scale = spec.sigma / std::sqrt(w0 * w0 + w1 * w1);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  double running = 0.0;
  for (int t = 0; t < d; ++t) {
    const double e0 = standardized_draw(gen_white, spec);
    running += standardized_draw(gen_cum, spec);
    const double e1 = running * inv_sqrt_d;
    out[static_cast<std::size_t>(t)] = scale * (w0 * e0 + w1 * e1);
  }
  return out;
}

CurveBatch gp_batch(int n, int d, double kernel_lengthscale, double noise_sd,
                    std::uint64_t seed, double amplitude) {
  if (n < 1) throw invalid_parameter("gp_batch: need n >= 1");
  if (d < 2) throw invalid_parameter("gp_batch: need d >= 2");
  if (!(kernel_lengthscale > 0.0)) throw invalid_parameter("gp_batch: lengthscale must be positive");
  if (!(noise_sd >= 0.0)) throw invalid_parameter("gp_batch: noise_sd must be nonnegative");
  if (!(amplitude >= 0.0)) throw invalid_parameter("gp_batch: amplitude must be nonnegative");

  const std::vector<double> mean = sinusoid(d);

  Eigen::MatrixXd chol;  // empty when amplitude == 0
  if (amplitude > 0.0) {
    Eigen::MatrixXd k(d, d);
    const double amp2 = amplitude * amplitude;
    const double inv2l2 = 1.0 / (2.0 * kernel_lengthscale * kernel_lengthscale);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double dt = static_cast<double>(i - j) / d;
        k(i, j) = amp2 * std::exp(-dt * dt * inv2l2);
      }
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
      k.diagonal().array() += 1e-8;
      llt.compute(k);
      if (llt.info() != Eigen::Success)
        throw numeric_error("gp_batch: kernel matrix is not positive definite");
    }
    chol = llt.matrixL();
  }

  CurveBatch batch;
  batch.n = n;
  batch.d = d;
  batch.seed = seed;
  batch.values.resize(static_cast<std::size_t>(n) * d);
  batch.truth = mean;

  Eigen::VectorXd z(d), path(d);
  for (int i = 0; i < n; ++i) {
    auto gen = rng::Xoshiro256pp::stream(seed, kTagGpRow, static_cast<std::uint64_t>(i));
    auto row = batch.row(i);
    if (amplitude > 0.0) {
      for (int t = 0; t < d; ++t) z(t) = gen.normal();
      path.noalias() = chol * z;
      for (int t = 0; t < d; ++t)
        row[static_cast<std::size_t>(t)] = mean[static_cast<std::size_t>(t)] + path(t);
    } else {
      for (int t = 0; t < d; ++t)
        row[static_cast<std::size_t>(t)] = mean[static_cast<std::size_t>(t)];
    }
    if (noise_sd > 0.0)
      for (int t = 0; t < d; ++t) row[static_cast<std::size_t>(t)] += noise_sd * gen.normal();
  }
  return batch;
}

}  // namespace gridsmooth
