#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "gridsmooth/csv.hpp"
#include "gridsmooth/datagen.hpp"
#include "gridsmooth/rng.hpp"
#include "gridsmooth/stencils.hpp"

using namespace gridsmooth;

TEST_CASE("irregular curve: positivity, determinism, degenerate sizes") {
  const auto f = irregular_curve(100, 11);
  CHECK(f.size() == 100);
  for (double v : f) CHECK(v > 0.0);

  const auto again = irregular_curve(100, 11);
  CHECK(f == again);
  const auto other = irregular_curve(100, 12);
  CHECK(f != other);

  CHECK_THROWS_AS(irregular_curve(7, 1), invalid_parameter);
}

TEST_CASE("irregular curve: heterogeneous roughness across seeds") {
  const StencilFamily family = canonical_family(2);
  std::vector<double> roughness;
  for (int seed = 0; seed < 200; ++seed) {
    const auto f = irregular_curve(100, static_cast<std::uint64_t>(seed));
    const auto d2 = apply_stencil(family.member(2), f);
    double e = 0.0;
    for (double v : d2) e += v * v;
    roughness.push_back(e);
  }
  std::sort(roughness.begin(), roughness.end());
  const double p5 = roughness[10];
  const double p95 = roughness[189];
  CHECK(p95 / p5 > 2.0);
  // frozen regression band for this generator and seed layout
  CHECK(p5 > 0.5);
  CHECK(p5 < 0.9);
  CHECK(p95 > 1.1);
  CHECK(p95 < 1.8);
}

TEST_CASE("sinusoid fixture") {
  const auto f100 = sinusoid(100);
  CHECK(std::fabs(f100.back()) <= 1e-12);  // sin(6 pi)
  double peak = 0.0;
  for (double v : f100) peak = std::max(peak, std::fabs(v));
  CHECK(peak >= 0.99);

  const auto f25 = sinusoid(25);
  CHECK(f25.size() == 25);
  for (double v : f25) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(sinusoid(1), invalid_parameter);
}

TEST_CASE("noise: zero sigma, validation, determinism") {
  NoiseSpec spec;
  spec.sigma = 0.0;
  const auto z = noise(64, spec, 5);
  for (double v : z) CHECK(v == 0.0);

  NoiseSpec bad_mix;
  bad_mix.mix_white = 0.5;
  bad_mix.mix_cumulative = 0.3;
  CHECK_THROWS_AS(noise(10, bad_mix, 1), invalid_parameter);

  NoiseSpec bad_dof;
  bad_dof.distribution = NoiseDistribution::student_t;
  bad_dof.dof = 2.0;
  CHECK_THROWS_AS(noise(10, bad_dof, 1), invalid_parameter);

  NoiseSpec spec2;
  CHECK(noise(32, spec2, 9) == noise(32, spec2, 9));
}

TEST_CASE("noise: unit variance at the last grid point for every family") {
  const int d = 50;
  const long reps = 100000;
  for (NoiseDistribution dist :
       {NoiseDistribution::gaussian, NoiseDistribution::laplace, NoiseDistribution::student_t}) {
    NoiseSpec spec;
    spec.distribution = dist;
    spec.sigma = 2.0;  // variance check exercises the sigma scaling too
    double sum = 0.0, sum2 = 0.0;
    for (long rep = 0; rep < reps; ++rep) {
      const auto eps = noise(d, spec, 300000 + static_cast<std::uint64_t>(rep));
      const double v = eps.back();
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / reps;
    const double var = sum2 / reps - mean * mean;
    CHECK(var >= 0.95 * 4.0);
    CHECK(var <= 1.05 * 4.0);
  }
}

TEST_CASE("noise: the cumulative component induces positive lag-1 dependence") {
  const int d = 100;
  double acc = 0.0;
  NoiseSpec spec;  // default 0.7 / 0.3 mixture
  for (int rep = 0; rep < 1000; ++rep) {
    const auto eps = noise(d, spec, 40000 + static_cast<std::uint64_t>(rep));
    double mean = 0.0;
    for (double v : eps) mean += v;
    mean /= d;
    double num = 0.0, den = 0.0;
    for (int t = 0; t < d; ++t) {
      const double c = eps[static_cast<std::size_t>(t)] - mean;
      den += c * c;
      if (t + 1 < d) num += c * (eps[static_cast<std::size_t>(t + 1)] - mean);
    }
    acc += num / den;
  }
  CHECK(acc / 1000.0 > 0.0);
}

TEST_CASE("gp batch: degenerate limits, shapes, determinism") {
  SUBCASE("zero amplitude and zero noise reproduce the mean exactly") {
    const CurveBatch batch = gp_batch(4, 60, 10.0, 0.0, 3, 0.0);
    REQUIRE(batch.truth.has_value());
    for (int i = 0; i < batch.n; ++i) {
      const auto row = batch.row(i);
      for (int t = 0; t < batch.d; ++t)
        CHECK(row[static_cast<std::size_t>(t)] == (*batch.truth)[static_cast<std::size_t>(t)]);
    }
  }

  SUBCASE("shape and per-seed determinism") {
    const CurveBatch a = gp_batch(10, 100, 0.1, 0.2, 77);
    CHECK(a.n == 10);
    CHECK(a.d == 100);
    CHECK(a.values.size() == 1000);
    const CurveBatch b = gp_batch(10, 100, 0.1, 0.2, 77);
    CHECK(a.values == b.values);
    const CurveBatch c = gp_batch(10, 100, 0.1, 0.2, 78);
    CHECK(a.values != c.values);
  }

  SUBCASE("rows are independent substreams: a prefix batch matches") {
    const CurveBatch big = gp_batch(8, 40, 0.1, 0.2, 5);
    const CurveBatch small = gp_batch(3, 40, 0.1, 0.2, 5);
    for (int i = 0; i < 3; ++i)
      for (int t = 0; t < 40; ++t)
        CHECK(big.row(i)[static_cast<std::size_t>(t)] ==
              small.row(i)[static_cast<std::size_t>(t)]);
  }

  SUBCASE("law of large numbers: the batch mean approaches the mean function") {
    const CurveBatch batch = gp_batch(10000, 100, 0.1, 0.2, 1);
    std::vector<double> mean(100, 0.0);
    for (int i = 0; i < batch.n; ++i) {
      const auto row = batch.row(i);
      for (int t = 0; t < 100; ++t) mean[static_cast<std::size_t>(t)] += row[static_cast<std::size_t>(t)];
    }
    double worst = 0.0;
    for (int t = 0; t < 100; ++t)
      worst = std::max(worst, std::fabs(mean[static_cast<std::size_t>(t)] / batch.n -
                                        (*batch.truth)[static_cast<std::size_t>(t)]));
    CHECK(worst <= 0.02);
  }

  SUBCASE("near-singular kernels fall back to the jittered factorization") {
    // a huge lengthscale makes the covariance numerically rank one
    const CurveBatch batch = gp_batch(3, 40, 1e6, 0.0, 8);
    for (int i = 0; i < batch.n; ++i) {
      const auto row = batch.row(i);
      // each path is the mean plus an almost-constant offset
      const double offset = row[0] - (*batch.truth)[0];
      CHECK(std::isfinite(offset));
      for (int t = 0; t < batch.d; ++t) {
        CHECK(std::isfinite(row[static_cast<std::size_t>(t)]));
        CHECK(std::fabs(row[static_cast<std::size_t>(t)] -
                        (*batch.truth)[static_cast<std::size_t>(t)] - offset) <= 1e-2);
      }
    }
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(gp_batch(0, 10, 0.1, 0.1, 1), invalid_parameter);
    CHECK_THROWS_AS(gp_batch(1, 1, 0.1, 0.1, 1), invalid_parameter);
    CHECK_THROWS_AS(gp_batch(1, 10, 0.0, 0.1, 1), invalid_parameter);
  }
}

TEST_CASE("csv round trip and error reporting") {
  const std::string path = "gridsmooth_test_roundtrip.csv";
  CurveBatch batch;
  batch.n = 3;
  batch.d = 7;
  batch.seed = 1;
  auto gen = rng::Xoshiro256pp(15);
  batch.values.resize(21);
  for (double& v : batch.values) v = gen.normal() * 1e3;

  for (bool header : {true, false}) {
    write_curves(path, batch, header);
    const CurveBatch back = read_curves(path);
    CHECK(back.n == 3);
    CHECK(back.d == 7);
    for (std::size_t i = 0; i < batch.values.size(); ++i)
      CHECK(back.values[i] == batch.values[i]);  // 17 digits: bit-exact
  }

  {
    std::ofstream bad("gridsmooth_test_ragged.csv");
    bad << "1,2,3\n1,2\n";
  }
  CHECK_THROWS_AS(read_curves("gridsmooth_test_ragged.csv"), parse_error);

  {
    std::ofstream bad("gridsmooth_test_nonnum.csv");
    bad << "1,2,3\n1,x,3\n";
  }
  CHECK_THROWS_AS(read_curves("gridsmooth_test_nonnum.csv"), parse_error);

  {
    std::ofstream bad("gridsmooth_test_empty.csv");
  }
  CHECK_THROWS_AS(read_curves("gridsmooth_test_empty.csv"), parse_error);
  CHECK_THROWS_AS(read_curves("gridsmooth_no_such_file.csv"), io_error);

  for (const char* scratch : {path.c_str(), "gridsmooth_test_ragged.csv",
                              "gridsmooth_test_nonnum.csv", "gridsmooth_test_empty.csv"})
    std::remove(scratch);
}
