#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "gridsmooth/experiments.hpp"
#include "gridsmooth/smoother.hpp"

using namespace gridsmooth;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const ReportCell& find_cell(const ExperimentReport& rep, const std::string& method,
                            const std::string& noise, int d) {
  for (const ReportCell& c : rep.cells)
    if (c.method == method && c.noise == noise && c.d == d) return c;
  REQUIRE(false);
  static ReportCell dummy;
  return dummy;
}

}  // namespace

TEST_CASE("energy decomposition matches the interior-row counts") {
  EnergyConfig cfg;
  cfg.n_draws = 100000;
  cfg.d = 31;
  cfg.seed = 99;
  const ExperimentReport rep = run_energy_decomposition(cfg);

  REQUIRE(rep.table.size() == 5);
  const double expected[5] = {31, 29, 27, 25, 21};
  for (int r = 0; r <= 4; ++r) {
    CHECK(std::stod(rep.table[static_cast<std::size_t>(r)][1]) == expected[r]);
    CHECK(rep.diagnostic("rel_error_r" + std::to_string(r)) <= 0.01);
  }
  CHECK(rep.diagnostic("max_abs_crosscov") <= 0.03);
}

TEST_CASE("contrast linearity is exact for the location family") {
  LinearityConfig cfg;
  cfg.seed = 4;
  const ContrastResult res = run_contrast_linearity(cfg);
  CHECK(res.linearity_residual <= 1e-10);

  // centred contrasts have mean zero within three standard errors
  const ExperimentReport rep = linearity_report(cfg, res);
  CHECK(rep.diagnostic("max_abs_standardized_mean") <= 3.0);
  CHECK(rep.diagnostic("linearity_residual") <= 1e-10);

  // the statistic equals sqrt(n) times the column means
  for (int t = 0; t < res.d; ++t) {
    double mean = 0.0;
    for (int i = 0; i < res.n; ++i)
      mean += res.h_values[static_cast<std::size_t>(i) * res.d + t];
    mean /= res.n;
    CHECK(res.statistic[static_cast<std::size_t>(t)] /
              std::sqrt(static_cast<double>(res.n)) ==
          doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("contrast linearity with a zero shift is identically zero") {
  LinearityConfig cfg;
  cfg.n = 50;
  cfg.d = 20;
  cfg.shift.assign(20, 0.0);
  const ContrastResult res = run_contrast_linearity(cfg);
  CHECK(res.linearity_residual == 0.0);
}

TEST_CASE("convergence: noiseless degenerate case reduces to deterministic bias") {
  ConvergenceConfig cfg;
  cfg.n_list = {5, 10};
  cfg.n_reps = 2;
  cfg.d = 60;
  cfg.amplitude = 0.0;
  cfg.noise_sd = 0.0;
  cfg.threads = 1;
  const ExperimentReport rep = run_convergence(cfg);

  // direct dense computation of ||S f - f||^2 / d at alpha_n for n = 5
  const StencilFamily family = canonical_family(4);
  const std::vector<Stencil> binomials = binomial_stencils(4);
  const PenaltyMatrix p = blended_penalty(family, binomials, 2, 0.5, cfg.d);
  const double alpha = std::pow(5.0, -1.0 / 4.5);
  const auto dense = p.to_dense();
  Eigen::MatrixXd pm(cfg.d, cfg.d);
  for (int i = 0; i < cfg.d; ++i)
    for (int j = 0; j < cfg.d; ++j)
      pm(i, j) = dense[static_cast<std::size_t>(i) * cfg.d + j];
  const auto truth = sinusoid(cfg.d);
  Eigen::Map<const Eigen::VectorXd> f(truth.data(), cfg.d);
  const Eigen::VectorXd sf =
      (Eigen::MatrixXd::Identity(cfg.d, cfg.d) + alpha * pm).inverse() * f;
  const double bias2 = (sf - f).squaredNorm() / cfg.d;

  CHECK(std::stod(rep.table[0][2]) == doctest::Approx(bias2).epsilon(1e-10));
  CHECK(std::stod(rep.table[0][3]) <= 1e-30);  // no dispersion without randomness
}

TEST_CASE("convergence: scaled variance decreases with n") {
  ConvergenceConfig cfg;
  cfg.n_list = {10, 20, 50, 100, 200};
  cfg.n_reps = 8;
  cfg.d = 50;
  cfg.scaled_variance = true;
  cfg.threads = 2;
  cfg.seed = 7;
  const ExperimentReport rep = run_convergence(cfg);
  std::vector<double> var;
  for (const auto& row : rep.table) var.push_back(std::stod(row[3]));
  int inversions = 0;
  for (std::size_t i = 1; i < var.size(); ++i)
    if (var[i] >= var[i - 1]) ++inversions;
  CHECK(inversions <= 1);
}

TEST_CASE("table2 smoke: cells, oracle-vs-gcv sanity, determinism across threads") {
  Table2Config cfg;
  cfg.n_reps = 3;
  cfg.d_list = {25};
  cfg.seed = 17;
  cfg.threads = 1;
  const ExperimentReport rep = run_table2(cfg);
  REQUIRE(rep.cells.size() == 15);
  for (const ReportCell& c : rep.cells) {
    CHECK(c.mse > 0.0);
    CHECK(c.sd >= 0.0);
    CHECK(c.d == 25);
  }

  // reruns and thread counts do not change the persisted bytes
  cfg.threads = 2;
  const ExperimentReport rep2 = run_table2(cfg);
  namespace fs = std::filesystem;
  const std::string dir1 = "gridsmooth_test_report_a";
  const std::string dir2 = "gridsmooth_test_report_b";
  write_report(rep, dir1);
  write_report(rep2, dir2);
  CHECK(slurp(dir1 + "/report.csv") == slurp(dir2 + "/report.csv"));
  CHECK(slurp(dir1 + "/config.txt") == slurp(dir2 + "/config.txt"));
  write_report(rep, dir2);  // overwrite with the same content
  CHECK(slurp(dir1 + "/report.csv") == slurp(dir2 + "/report.csv"));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("table1 smoke: local methods track each other and beat the global bases") {
  Table1Config cfg;
  cfg.n_reps = 20;
  cfg.seed = 11;
  cfg.threads = 2;
  const ExperimentReport rep = run_table1(cfg);
  for (const char* noise : {"gaussian", "laplace", "student_t"}) {
    const double seq = find_cell(rep, "discrete_seq", noise, 100).mse;
    const double convex = find_cell(rep, "discrete_convex", noise, 100).mse;
    const double fourier = find_cell(rep, "fourier", noise, 100).mse;
    const double bspline = find_cell(rep, "bspline", noise, 100).mse;
    const double kernel = find_cell(rep, "gauss_kernel", noise, 100).mse;
    CHECK(std::fabs(convex - kernel) / std::max(convex, kernel) <= 0.08);
    CHECK(convex < fourier);
    CHECK(seq < fourier);
    CHECK(kernel < fourier);
    CHECK(fourier < bspline);
    for (const ReportCell& c : rep.cells) CHECK(c.sd >= 0.0);
  }
}

TEST_CASE("table1 zero-noise variant: adaptive discrete methods reach zero error") {
  Table1Config cfg;
  cfg.n_reps = 2;
  cfg.sigma = 0.0;
  cfg.seed = 5;
  cfg.threads = 2;
  const ExperimentReport rep = run_table1(cfg);
  for (const char* method : {"discrete_seq", "discrete_convex"})
    for (const char* noise : {"gaussian", "laplace", "student_t"})
      CHECK(find_cell(rep, method, noise, 100).mse <= 1e-4);
}

TEST_CASE("report writer: schemas and plot files") {
  ConvergenceConfig cfg;
  cfg.n_list = {5, 10, 20};
  cfg.n_reps = 2;
  cfg.d = 40;
  cfg.threads = 1;
  const ExperimentReport rep = run_convergence(cfg);
  const std::string dir = "gridsmooth_test_report_c";
  const auto paths = write_report(rep, dir);
  CHECK(paths.size() >= 3);

  const std::string plot = slurp(dir + "/plotdata_msebias.tsv");
  CHECK(plot.rfind("log_n\tlog_value\tfit\n", 0) == 0);
  int lines = 0;
  for (char c : plot)
    if (c == '\n') ++lines;
  CHECK(lines == 4);  // header + three points

  const std::string cfg_txt = slurp(dir + "/config.txt");
  CHECK(cfg_txt.find("seed=") != std::string::npos);
  CHECK(cfg_txt.find("n_list=5,10,20") != std::string::npos);
  std::filesystem::remove_all(dir);

  Table2Config t2;
  t2.n_reps = 2;
  t2.d_list = {25};
  t2.threads = 2;
  const std::string dir2 = "gridsmooth_test_report_d";
  write_report(run_table2(t2), dir2);
  const std::string csv = slurp(dir2 + "/report.csv");
  CHECK(csv.rfind("method,noise,d,mse,sd\n", 0) == 0);
  std::filesystem::remove_all(dir2);
}
