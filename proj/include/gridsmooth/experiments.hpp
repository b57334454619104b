#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridsmooth/baselines.hpp"
#include "gridsmooth/datagen.hpp"
#include "gridsmooth/selection.hpp"

namespace gridsmooth {

struct ReportCell {
  std::string method;
  std::string noise;
  int d = 0;
  double mse = 0.0;
  double sd = 0.0;
};

struct PlotPoint {
  double log_n = 0.0;
  double log_value = 0.0;
  double fit = 0.0;
};

/// Structured experiment results. The config record (seeds included) is
/// sufficient to reproduce every number bit-identically; runtime_seconds is
/// informational and never serialized.
struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ReportCell> cells;                          // method/noise/d tables
  std::vector<std::string> table_header;                  // custom report.csv layout
  std::vector<std::vector<std::string>> table;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::map<std::string, std::vector<PlotPoint>> plots;    // plotdata_<key>.tsv
  double runtime_seconds = 0.0;

  double diagnostic(const std::string& key) const;
};

struct Table1Config {
  int n_reps = 100;
  int d = 100;
  double sigma = 0.055;
  std::uint64_t seed = 42;
  int threads = 0;  // 0: resolve from env / hardware
};

struct Table2Config {
  int n_reps = 100;
  std::vector<int> d_list{25, 50, 100};
  double noise_sd = 0.2;
  std::uint64_t seed = 42;
  int threads = 0;
};

/// Rate-study parameters: smoothness index beta, spectral exponent s,
/// source/moment bounds (recorded for documentation), and the constant in
/// alpha_n = C n^{-1/(2 beta + s)}.
struct RateParams {
  double beta = 2.0;
  double s = 0.5;
  double rho = 1.0;
  double moment_bound = 2.0;
  double alpha_constant = 1.0;
};

struct ConvergenceConfig {
  std::vector<int> n_list{10, 20, 50, 100, 200, 500, 1000};
  int d = 100;
  RateParams rate;
  int n_reps = 100;
  double lengthscale = 0.1;
  double amplitude = 1.0;
  double noise_sd = 0.2;
  bool scaled_variance = false;  // divide the dispersion by n as well
  std::uint64_t seed = 42;
  int threads = 0;
};

struct EnergyConfig {
  long n_draws = 100000;
  int d = 31;
  std::uint64_t seed = 42;
};

struct LinearityConfig {
  int n = 200;
  int d = 50;
  double alpha = 1.0;
  int order = 2;
  double eta = 0.5;
  std::vector<double> shift;  // empty: unit-norm sinusoidal default
  std::uint64_t seed = 42;
};

/// Centred contrasts at the true location, the root-n scaled statistic, and
/// the norm of the local-shift linearity defect.
struct ContrastResult {
  int n = 0;
  int d = 0;
  std::vector<double> h_values;   // n x d, row-major
  std::vector<double> statistic;  // length d
  double linearity_residual = 0.0;
};

ExperimentReport run_table1(const Table1Config& cfg);
ExperimentReport run_table2(const Table2Config& cfg);
ExperimentReport run_convergence(const ConvergenceConfig& cfg);
ExperimentReport run_energy_decomposition(const EnergyConfig& cfg);
ContrastResult run_contrast_linearity(const LinearityConfig& cfg);
ExperimentReport linearity_report(const LinearityConfig& cfg, const ContrastResult& result);

/// Write report.csv, config.txt, and plotdata_*.tsv under dir (created if
/// missing); returns the paths written. Reruns with identical content
/// overwrite byte-identically.
std::vector<std::string> write_report(const ExperimentReport& report,
                                      const std::string& dir);

/// Thread-count resolution: positive request wins, then GRIDSMOOTH_THREADS,
/// then hardware concurrency.
int resolve_threads(int requested);

}  // namespace gridsmooth
