#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gridsmooth/kernels.hpp"
#include "gridsmooth/rng.hpp"

namespace gk = gridsmooth::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  auto gen = gridsmooth::rng::Xoshiro256pp(seed);
  std::vector<double> v(n);
  for (double& x : v) x = gen.normal();
  return v;
}

}  // namespace

TEST_CASE("scalar kernels: small hand-computed cases") {
  const gk::Ops& ops = gk::scalar_ops();
  const double a[4] = {1.0, 2.0, 3.0, 4.0};
  const double b[4] = {-1.0, 0.5, 2.0, 1.0};
  CHECK(ops.dot(a, b, 4) == doctest::Approx(1.0 * -1 + 2 * 0.5 + 3 * 2 + 4 * 1));
  CHECK(ops.sum_sq(a, 4) == doctest::Approx(30.0));
  CHECK(ops.sum_sq_diff(a, b, 4) == doctest::Approx(4.0 + 2.25 + 1.0 + 9.0));

  double y[4] = {1.0, 1.0, 1.0, 1.0};
  ops.axpy(2.0, a, y, 4);
  CHECK(y[0] == 3.0);
  CHECK(y[3] == 9.0);

  const double x[5] = {1, 2, 3, 4, 5};
  const double w[3] = {1, 0, -1};
  double out[3];
  ops.convolve_valid(x, 5, w, 3, out);
  CHECK(out[0] == doctest::Approx(-2.0));
  CHECK(out[1] == doctest::Approx(-2.0));
  CHECK(out[2] == doctest::Approx(-2.0));

  const double m[6] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  const double v[3] = {1, -1, 2};
  double mv[2];
  ops.matvec(m, 2, 3, v, mv);
  CHECK(mv[0] == doctest::Approx(1 - 2 + 6));
  CHECK(mv[1] == doctest::Approx(4 - 5 + 12));
}

TEST_CASE("avx2 kernels match the scalar reference") {
  const gk::Ops* vec = gk::avx2_ops();
  if (!vec || !gk::avx2_available()) {
    MESSAGE("avx2 unavailable, equivalence skipped");
    return;
  }
  const gk::Ops& ref = gk::scalar_ops();

  // sizes cover every vector remainder
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{4},
                        std::size_t{5}, std::size_t{7}, std::size_t{8}, std::size_t{15},
                        std::size_t{16}, std::size_t{17}, std::size_t{63}, std::size_t{100},
                        std::size_t{1021}}) {
    const auto a = random_vec(n, 1000 + n);
    const auto b = random_vec(n, 2000 + n);

    CHECK(vec->dot(a.data(), b.data(), n) ==
          doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(vec->sum_sq(a.data(), n) ==
          doctest::Approx(ref.sum_sq(a.data(), n)).epsilon(1e-12));
    CHECK(vec->sum_sq_diff(a.data(), b.data(), n) ==
          doctest::Approx(ref.sum_sq_diff(a.data(), b.data(), n)).epsilon(1e-12));

    auto y1 = random_vec(n, 3000 + n);
    auto y2 = y1;
    ref.axpy(0.37, a.data(), y1.data(), n);
    vec->axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));
  }

  for (std::size_t nw : {std::size_t{1}, std::size_t{3}, std::size_t{5}, std::size_t{7},
                         std::size_t{11}}) {
    const std::size_t nx = 97;
    const auto x = random_vec(nx, 40 + nw);
    const auto w = random_vec(nw, 50 + nw);
    std::vector<double> out1(nx - nw + 1), out2(nx - nw + 1);
    ref.convolve_valid(x.data(), nx, w.data(), nw, out1.data());
    vec->convolve_valid(x.data(), nx, w.data(), nw, out2.data());
    for (std::size_t i = 0; i < out1.size(); ++i)
      CHECK(out1[i] == doctest::Approx(out2[i]).epsilon(1e-12));
  }

  {
    const std::size_t rows = 31, cols = 53;
    const auto m = random_vec(rows * cols, 7);
    const auto v = random_vec(cols, 8);
    std::vector<double> y1(rows), y2(rows);
    ref.matvec(m.data(), rows, cols, v.data(), y1.data());
    vec->matvec(m.data(), rows, cols, v.data(), y2.data());
    for (std::size_t i = 0; i < rows; ++i)
      CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
  }
}

TEST_CASE("backend dispatch override") {
  gk::force_backend("scalar");
  CHECK(gk::active_backend() == "scalar");
  CHECK_THROWS(gk::force_backend("no-such-backend"));
  gk::force_backend("auto");
  if (gk::avx2_available()) CHECK(gk::active_backend() == "avx2");
}
