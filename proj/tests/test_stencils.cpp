#include <doctest.h>

#include <cmath>
#include <vector>

#include "gridsmooth/rng.hpp"
#include "gridsmooth/stencils.hpp"

using namespace gridsmooth;

namespace {

// figure rows, unnormalized
const std::vector<std::vector<double>> kCanonicalRows = {
    {1},
    {1, 0, -1},
    {1, -1, 0, -1, 1},
    {2, -3, 0, 0, 0, 3, -2},
    {7, -16, 9, 0, 0, 0, 0, 0, 9, -16, 7},
};

std::vector<double> normalized(std::vector<double> w) {
  double n2 = 0.0;
  for (double v : w) n2 += v * v;
  for (double& v : w) v /= std::sqrt(n2);
  return w;
}

double max_deviation_up_to_sign(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    plus = std::max(plus, std::fabs(a[i] - b[i]));
    minus = std::max(minus, std::fabs(a[i] + b[i]));
  }
  return std::min(plus, minus);
}

}  // namespace

TEST_CASE("canonical family matches the fixture rows") {
  const StencilFamily family = canonical_family(4);
  REQUIRE(family.members.size() == 5);
  for (int r = 0; r <= 4; ++r) {
    const Stencil& s = family.member(r);
    CHECK(s.order == r);
    CHECK(s.half_width == kMinimalHalfWidth[static_cast<std::size_t>(r)]);
    CHECK(max_deviation_up_to_sign(
              s.weights, normalized(kCanonicalRows[static_cast<std::size_t>(r)])) <= 1e-10);
    // sign convention: leftmost nonzero weight positive
    for (double w : s.weights) {
      if (w != 0.0) {
        CHECK(w > 0.0);
        break;
      }
    }
    double norm2 = 0.0;
    for (double w : s.weights) norm2 += w * w;
    CHECK(std::fabs(std::sqrt(norm2) - 1.0) <= 1e-12);
  }
}

TEST_CASE("canonical family input validation") {
  CHECK_THROWS_AS(canonical_family(5), unsupported_order);
  CHECK_THROWS_AS(canonical_family(-1), invalid_parameter);
  const StencilFamily f0 = canonical_family(0);
  REQUIRE(f0.members.size() == 1);
  CHECK(f0.member(0).half_width == 0);
  CHECK(f0.member(0).weights[0] == 1.0);
}

TEST_CASE("solve_stencil reproduces the canonical family") {
  const StencilFamily canonical = canonical_family(4);
  StencilFamily built;
  built.max_order = 0;
  built.members.push_back(solve_stencil(0, 0, built));
  for (int r = 1; r <= 4; ++r) {
    const Stencil s =
        solve_stencil(r, kMinimalHalfWidth[static_cast<std::size_t>(r)], built);
    // pad lower orders happens inside; compare against fixture
    CHECK(max_deviation_up_to_sign(
              s.weights, canonical.member(r).weights) <= 1e-10);
    built.members.push_back(s);
    built.max_order = r;
  }
}

TEST_CASE("solve_stencil: fixture examples and errors") {
  const StencilFamily family = canonical_family(4);

  const Stencil d2 = solve_stencil(2, 2, family);
  CHECK(max_deviation_up_to_sign(d2.weights, normalized({1, -1, 0, -1, 1})) <= 1e-10);

  const Stencil d3 = solve_stencil(3, 3, family);
  CHECK(max_deviation_up_to_sign(d3.weights, normalized({2, -3, 0, 0, 0, 3, -2})) <= 1e-10);

  CHECK_THROWS_AS(solve_stencil(1, 0, family), infeasible_width);
  // widening finds the minimal feasible width
  const Stencil d1 = solve_stencil(1, 0, family, true);
  CHECK(d1.half_width == 1);
  CHECK(max_deviation_up_to_sign(d1.weights, normalized({1, 0, -1})) <= 1e-10);

  // a family missing the lower orders is rejected
  StencilFamily partial;
  partial.max_order = 0;
  partial.members.push_back(canonical_family(0).member(0));
  CHECK_THROWS_AS(solve_stencil(3, 3, partial), invalid_parameter);
}

TEST_CASE("binomial stencils") {
  const Stencil b2 = binomial_stencil(2);
  CHECK(b2.half_width == 1);
  CHECK(max_deviation_up_to_sign(b2.weights, normalized({1, -2, 1})) <= 1e-12);

  const Stencil b1 = binomial_stencil(1);
  CHECK(b1.half_width == 1);
  CHECK(max_deviation_up_to_sign(b1.weights, normalized({1, -1, 0})) <= 1e-12);

  const Stencil b3 = binomial_stencil(3);
  CHECK(b3.half_width == 2);
  CHECK(max_deviation_up_to_sign(b3.weights, normalized({1, -3, 3, -1, 0})) <= 1e-12);
  CHECK(std::fabs(b3.weights[0] - 1.0 / std::sqrt(20.0)) <= 1e-14);

  const Stencil b0 = binomial_stencil(0);
  CHECK(b0.half_width == 0);
  CHECK(b0.weights[0] == 1.0);
}

TEST_CASE("apply: annihilation and shape") {
  const StencilFamily family = canonical_family(4);

  std::vector<double> constant(12, 3.25);
  const auto out1 = apply_stencil(family.member(1), constant);
  REQUIRE(out1.size() == 10);
  for (double v : out1) CHECK(std::fabs(v) <= 1e-13);

  std::vector<double> ramp(15);
  for (int t = 0; t < 15; ++t) ramp[static_cast<std::size_t>(t)] = t + 1;
  const auto out2 = apply_stencil(family.member(2), ramp);
  REQUIRE(out2.size() == 11);
  for (double v : out2) CHECK(std::fabs(v) <= 1e-13);

  std::vector<double> any{0.3, -1.2, 4.5, 0.0, 2.0};
  const auto out0 = apply_stencil(family.member(0), any);
  CHECK(out0 == any);

  std::vector<double> tiny(4, 1.0);
  CHECK_THROWS_AS(apply_stencil(family.member(2), tiny), curve_too_short);
}

TEST_CASE("cross covariance: unit norms and exact decorrelation") {
  const StencilFamily family = canonical_family(4);
  for (int r = 0; r <= 4; ++r)
    for (int s = 0; s <= 4; ++s) {
      const double c = cross_covariance(family.member(r), family.member(s));
      if (r == s)
        CHECK(std::fabs(c - 1.0) <= 1e-12);
      else
        CHECK(std::fabs(c) <= 1e-12);
    }
}

TEST_CASE("vanishing moments and order detection") {
  const StencilFamily family = canonical_family(4);
  for (int r = 0; r <= 4; ++r) {
    const Stencil& s = family.member(r);
    for (int k = 0; k < r; ++k) {
      double moment = 0.0;
      for (int l = -s.half_width; l <= s.half_width; ++l)
        moment += s.weight(l) * std::pow(static_cast<double>(l), k);
      CHECK(std::fabs(moment) <= 1e-10);
    }
    double detect = 0.0;
    for (int l = -s.half_width; l <= s.half_width; ++l)
      detect += s.weight(l) * std::pow(static_cast<double>(l), r);
    CHECK(std::fabs(detect) > 1e-6);
  }
}

TEST_CASE("white noise calibration: unit variances, vanishing covariances") {
  const int d = 31;
  const long draws = 100000;
  const StencilFamily family = canonical_family(4);

  // accumulate per-(order, location) first and second moments plus
  // cross products at common centres for one representative pair set
  std::vector<std::vector<double>> sum(5), sum2(5);
  std::vector<int> out_len(5);
  for (int r = 0; r <= 4; ++r) {
    out_len[static_cast<std::size_t>(r)] = d - 2 * family.member(r).half_width;
    sum[static_cast<std::size_t>(r)].assign(
        static_cast<std::size_t>(out_len[static_cast<std::size_t>(r)]), 0.0);
    sum2[static_cast<std::size_t>(r)] = sum[static_cast<std::size_t>(r)];
  }
  // cross products for all pairs at the narrowest common support
  double cross[5][5] = {};
  double cross_a[5][5] = {};
  double cross_b[5][5] = {};
  const int l_max = family.member(4).half_width;
  const int n_centers = d - 2 * l_max;

  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> outs(5);
  for (long i = 0; i < draws; ++i) {
    auto gen = gridsmooth::rng::Xoshiro256pp::stream(321, 77, static_cast<std::uint64_t>(i));
    for (double& v : x) v = gen.normal();
    for (int r = 0; r <= 4; ++r) {
      outs[static_cast<std::size_t>(r)] = apply_stencil(family.member(r), x);
      const auto& o = outs[static_cast<std::size_t>(r)];
      for (std::size_t t = 0; t < o.size(); ++t) {
        sum[static_cast<std::size_t>(r)][t] += o[t];
        sum2[static_cast<std::size_t>(r)][t] += o[t] * o[t];
      }
    }
    for (int r = 0; r <= 4; ++r)
      for (int s = r + 1; s <= 4; ++s) {
        const int off_r = l_max - family.member(r).half_width;
        const int off_s = l_max - family.member(s).half_width;
        // centre at the middle of the common support
        const int c = n_centers / 2;
        const double a = outs[static_cast<std::size_t>(r)][static_cast<std::size_t>(c + off_r)];
        const double b = outs[static_cast<std::size_t>(s)][static_cast<std::size_t>(c + off_s)];
        cross[r][s] += a * b;
        cross_a[r][s] += a;
        cross_b[r][s] += b;
      }
  }

  for (int r = 0; r <= 4; ++r)
    for (int t = 0; t < out_len[static_cast<std::size_t>(r)]; ++t) {
      const double m = sum[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] / draws;
      const double v =
          sum2[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] / draws - m * m;
      CHECK(v >= 0.97);
      CHECK(v <= 1.03);
    }
  for (int r = 0; r <= 4; ++r)
    for (int s = r + 1; s <= 4; ++s) {
      const double cov = cross[r][s] / draws -
                         (cross_a[r][s] / draws) * (cross_b[r][s] / draws);
      CHECK(std::fabs(cov) <= 0.03);
    }
}

TEST_CASE("serialization round trip") {
  const StencilFamily family = canonical_family(4);
  for (const Stencil& s : family.members) {
    const Stencil back = Stencil::parse(s.serialize());
    CHECK(back.order == s.order);
    CHECK(back.half_width == s.half_width);
    REQUIRE(back.weights.size() == s.weights.size());
    for (std::size_t i = 0; i < s.weights.size(); ++i)
      CHECK(back.weights[i] == s.weights[i]);  // 17 digits: bit-exact
  }
  CHECK_THROWS_AS(Stencil::parse("2 2 0.5 -0.5"), parse_error);
}
