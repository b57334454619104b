#include "gridsmooth/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <thread>

#include "gridsmooth/csv.hpp"
#include "gridsmooth/kernels.hpp"
#include "gridsmooth/rng.hpp"
#include "gridsmooth/smoother.hpp"

namespace gridsmooth {

namespace {

// stream tags for the per-experiment substreams
constexpr std::uint64_t kTagTable1Curve = 0x2001;
constexpr std::uint64_t kTagTable1Noise = 0x2002;
constexpr std::uint64_t kTagTable2Noise = 0x2003;
constexpr std::uint64_t kTagConvergence = 0x2004;
constexpr std::uint64_t kTagEnergy = 0x2005;
constexpr std::uint64_t kTagLinearity = 0x2006;

constexpr std::array<NoiseDistribution, 3> kNoiseFamilies{
    NoiseDistribution::gaussian, NoiseDistribution::laplace, NoiseDistribution::student_t};

const char* noise_name(NoiseDistribution d) {
  switch (d) {
    case NoiseDistribution::gaussian: return "gaussian";
    case NoiseDistribution::laplace: return "laplace";
    case NoiseDistribution::student_t: return "student_t";
  }
  return "?";
}

constexpr std::array<const char*, 5> kMethodNames{"discrete_seq", "discrete_convex",
                                                  "fourier", "bspline", "gauss_kernel"};

// Work items are claimed dynamically but write to index-addressed slots, so
// results are independent of the schedule; reductions then run in index order.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(std::span<const double> values) {
  MeanSd out;
  const std::size_t n = values.size();
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) {
      const double c = v - out.mean;
      ss += c * c;
    }
    out.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return out;
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 1.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

// ---- oracle-tuned methods shared by the table experiments ----

std::vector<double> oracle_alpha_grid() { return log_grid(1e-8, 1e4, 61); }

std::vector<double> eta_grid_11() {
  std::vector<double> g(11);
  for (int i = 0; i <= 10; ++i) g[static_cast<std::size_t>(i)] = i / 10.0;
  return g;
}

struct MethodCaches {
  int d = 0;
  std::vector<double> alpha_grid;
  std::vector<double> eta_grid;
  std::vector<double> bw_grid;
  std::vector<std::vector<Smoother>> seq;     // [order-1][alpha], blend eta = 0.5
  std::vector<std::vector<Smoother>> convex;  // [eta][alpha], order 2
  std::unique_ptr<BasisSmoother> fourier;
  std::unique_ptr<BasisSmoother> bspline;
  std::vector<KernelSmoother> kernel;
};

MethodCaches build_caches(int d) {
  MethodCaches c;
  c.d = d;
  c.alpha_grid = oracle_alpha_grid();
  c.eta_grid = eta_grid_11();
  c.bw_grid = log_grid(0.005, 0.5, 20);

  const StencilFamily family = canonical_family(kMaxSupportedOrder);
  const std::vector<Stencil> binomials = binomial_stencils(kMaxSupportedOrder);

  for (int r = 1; r <= kMaxSupportedOrder; ++r) {
    const PenaltyMatrix p = blended_penalty(family, binomials, r, 0.5, d);
    std::vector<Smoother> row;
    row.reserve(c.alpha_grid.size());
    for (double a : c.alpha_grid) row.push_back(Smoother::make(p, a));
    c.seq.push_back(std::move(row));
  }

  for (double eta : c.eta_grid) {
    const PenaltyMatrix p = blended_penalty(family, binomials, 2, eta, d);
    std::vector<Smoother> row;
    row.reserve(c.alpha_grid.size());
    for (double a : c.alpha_grid) row.push_back(Smoother::make(p, a));
    c.convex.push_back(std::move(row));
  }

  const int n_basis = std::min(25, d);
  c.fourier = std::make_unique<BasisSmoother>(BasisKind::fourier, n_basis, 2, d);
  c.bspline = std::make_unique<BasisSmoother>(BasisKind::bspline, n_basis, 2, d);

  c.kernel.reserve(c.bw_grid.size());
  for (double h : c.bw_grid) c.kernel.emplace_back(d, h);
  return c;
}

// Oracle tuning of the four-order sequential smoother by coordinate descent
// over per-order alpha indices (three sweeps, highest order first).
double tune_sequential(const MethodCaches& c, std::span<const double> y,
                       std::span<const double> truth, double norm_div) {
  const std::size_t n_alpha = c.alpha_grid.size();
  std::array<std::size_t, 4> idx{0, 0, 0, 0};

  auto chain_mse = [&](const std::array<std::size_t, 4>& id) {
    std::vector<double> f(y.begin(), y.end());
    for (int r = kMaxSupportedOrder; r >= 1; --r)
      f = c.seq[static_cast<std::size_t>(r - 1)][id[static_cast<std::size_t>(r - 1)]].apply(f);
    return kernels::sum_sq_diff(f, truth) / norm_div;
  };

  double best = chain_mse(idx);
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int r = kMaxSupportedOrder; r >= 1; --r) {
      std::array<std::size_t, 4> trial = idx;
      for (std::size_t j = 0; j < n_alpha; ++j) {
        trial[static_cast<std::size_t>(r - 1)] = j;
        const double m = chain_mse(trial);
        if (m < best) {
          best = m;
          idx[static_cast<std::size_t>(r - 1)] = j;
        }
      }
    }
  }
  return best;
}

double tune_convex(const MethodCaches& c, std::span<const double> y,
                   std::span<const double> truth, double norm_div) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : c.convex)
    for (const Smoother& s : row) {
      const double m = kernels::sum_sq_diff(s.apply(y), truth) / norm_div;
      if (m < best) best = m;
    }
  return best;
}

double tune_basis(const BasisSmoother& basis, std::span<const double> alpha_grid,
                  std::span<const double> y, std::span<const double> truth,
                  double norm_div) {
  double best = std::numeric_limits<double>::infinity();
  for (double a : alpha_grid) {
    const double m = kernels::sum_sq_diff(basis.fit(y, a), truth) / norm_div;
    if (m < best) best = m;
  }
  return best;
}

double tune_kernel(const MethodCaches& c, std::span<const double> y,
                   std::span<const double> truth, double norm_div) {
  double best = std::numeric_limits<double>::infinity();
  for (const KernelSmoother& k : c.kernel) {
    const double m = kernels::sum_sq_diff(k.apply(y), truth) / norm_div;
    if (m < best) best = m;
  }
  return best;
}

std::array<double, 5> tune_all(const MethodCaches& c, std::span<const double> y,
                               std::span<const double> truth, double norm_div) {
  return {tune_sequential(c, y, truth, norm_div),
          tune_convex(c, y, truth, norm_div),
          tune_basis(*c.fourier, c.alpha_grid, y, truth, norm_div),
          tune_basis(*c.bspline, c.alpha_grid, y, truth, norm_div),
          tune_kernel(c, y, truth, norm_div)};
}

std::string join_ints(std::span<const int> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

void push_common_config(ExperimentReport& rep, std::uint64_t seed) {
  rep.config.emplace_back("name", rep.name);
  rep.config.emplace_back("seed", std::to_string(seed));
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

double ExperimentReport::diagnostic(const std::string& key) const {
  for (const auto& [k, v] : diagnostics)
    if (k == key) return v;
  throw invalid_parameter("report: no diagnostic named '" + key + "'");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GRIDSMOOTH_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

ExperimentReport run_table1(const Table1Config& cfg) {
  Stopwatch watch;
  if (cfg.n_reps < 1) throw invalid_parameter("table1: need n_reps >= 1");
  ExperimentReport rep;
  rep.name = "table1";
  push_common_config(rep, cfg.seed);
  rep.config.emplace_back("n_reps", std::to_string(cfg.n_reps));
  rep.config.emplace_back("d", std::to_string(cfg.d));
  rep.config.emplace_back("sigma", format_double(cfg.sigma));
  rep.config.emplace_back("noise_mixture", "0.7,0.3");
  rep.config.emplace_back("mse_normalization", "sum");
  rep.config.emplace_back("seq_eta", "0.5");
  rep.config.emplace_back("oracle_alpha_grid", "1e-8,1e4,61");
  rep.config.emplace_back("oracle_eta_grid", "0,1,11");
  rep.config.emplace_back("oracle_bandwidth_grid", "0.005,0.5,20");

  const int threads = resolve_threads(cfg.threads);
  const MethodCaches caches = build_caches(cfg.d);

  // per replication: fresh irregular truth shared by all noise families
  std::vector<std::array<std::array<double, 5>, 3>> results(
      static_cast<std::size_t>(cfg.n_reps));
  parallel_for(cfg.n_reps, threads, [&](int r) {
    const std::vector<double> truth =
        irregular_curve(cfg.d, rng::derive_stream(cfg.seed, kTagTable1Curve,
                                                  static_cast<std::uint64_t>(r)));
    std::vector<double> y(static_cast<std::size_t>(cfg.d));
    for (std::size_t fi = 0; fi < kNoiseFamilies.size(); ++fi) {
      NoiseSpec spec;
      spec.distribution = kNoiseFamilies[fi];
      spec.mix_white = 0.7;
      spec.mix_cumulative = 0.3;
      spec.sigma = cfg.sigma;
      const std::vector<double> eps =
          noise(cfg.d, spec, rng::derive_stream(cfg.seed, kTagTable1Noise, fi,
                                                static_cast<std::uint64_t>(r)));
      for (int t = 0; t < cfg.d; ++t)
        y[static_cast<std::size_t>(t)] =
            truth[static_cast<std::size_t>(t)] + eps[static_cast<std::size_t>(t)];
      results[static_cast<std::size_t>(r)][fi] = tune_all(caches, y, truth, 1.0);
    }
  });

  std::vector<double> column(static_cast<std::size_t>(cfg.n_reps));
  for (std::size_t fi = 0; fi < kNoiseFamilies.size(); ++fi) {
    for (std::size_t m = 0; m < kMethodNames.size(); ++m) {
      for (int r = 0; r < cfg.n_reps; ++r)
        column[static_cast<std::size_t>(r)] = results[static_cast<std::size_t>(r)][fi][m];
      const MeanSd stats = mean_sd(column);
      rep.cells.push_back(
          {kMethodNames[m], noise_name(kNoiseFamilies[fi]), cfg.d, stats.mean, stats.sd});
    }
  }
  rep.runtime_seconds = watch.seconds();
  return rep;
}

ExperimentReport run_table2(const Table2Config& cfg) {
  Stopwatch watch;
  if (cfg.n_reps < 1) throw invalid_parameter("table2: need n_reps >= 1");
  if (cfg.d_list.empty()) throw invalid_parameter("table2: empty d list");
  ExperimentReport rep;
  rep.name = "table2";
  push_common_config(rep, cfg.seed);
  rep.config.emplace_back("n_reps", std::to_string(cfg.n_reps));
  rep.config.emplace_back("d_list", join_ints(cfg.d_list));
  rep.config.emplace_back("noise_sd", format_double(cfg.noise_sd));
  rep.config.emplace_back("mse_normalization", "mean");
  rep.config.emplace_back("seq_eta", "0.5");
  rep.config.emplace_back("oracle_alpha_grid", "1e-8,1e4,61");
  rep.config.emplace_back("oracle_eta_grid", "0,1,11");
  rep.config.emplace_back("oracle_bandwidth_grid", "0.005,0.5,20");

  const int threads = resolve_threads(cfg.threads);

  for (std::size_t di = 0; di < cfg.d_list.size(); ++di) {
    const int d = cfg.d_list[di];
    const std::vector<double> truth = sinusoid(d);
    const MethodCaches caches = build_caches(d);

    for (std::size_t fi = 0; fi < kNoiseFamilies.size(); ++fi) {
      std::vector<std::array<double, 5>> results(static_cast<std::size_t>(cfg.n_reps));
      parallel_for(cfg.n_reps, threads, [&](int r) {
        NoiseSpec spec;
        spec.distribution = kNoiseFamilies[fi];
        spec.mix_white = 1.0;
        spec.mix_cumulative = 0.0;
        spec.sigma = cfg.noise_sd;
        const std::vector<double> eps =
            noise(d, spec, rng::derive_stream(cfg.seed, kTagTable2Noise,
                                              di * kNoiseFamilies.size() + fi,
                                              static_cast<std::uint64_t>(r)));
        std::vector<double> y(static_cast<std::size_t>(d));
        for (int t = 0; t < d; ++t)
          y[static_cast<std::size_t>(t)] =
              truth[static_cast<std::size_t>(t)] + eps[static_cast<std::size_t>(t)];
        results[static_cast<std::size_t>(r)] =
            tune_all(caches, y, truth, static_cast<double>(d));
      });

      std::vector<double> column(static_cast<std::size_t>(cfg.n_reps));
      for (std::size_t m = 0; m < kMethodNames.size(); ++m) {
        for (int r = 0; r < cfg.n_reps; ++r)
          column[static_cast<std::size_t>(r)] = results[static_cast<std::size_t>(r)][m];
        const MeanSd stats = mean_sd(column);
        rep.cells.push_back(
            {kMethodNames[m], noise_name(kNoiseFamilies[fi]), d, stats.mean, stats.sd});
      }
    }
  }
  rep.runtime_seconds = watch.seconds();
  return rep;
}

ExperimentReport run_convergence(const ConvergenceConfig& cfg) {
  Stopwatch watch;
  if (cfg.n_list.empty()) throw invalid_parameter("convergence: empty n list");
  if (cfg.n_reps < 1) throw invalid_parameter("convergence: need n_reps >= 1");

  ExperimentReport rep;
  rep.name = "convergence";
  push_common_config(rep, cfg.seed);
  rep.config.emplace_back("n_list", join_ints(cfg.n_list));
  rep.config.emplace_back("d", std::to_string(cfg.d));
  rep.config.emplace_back("n_reps", std::to_string(cfg.n_reps));
  rep.config.emplace_back("beta", format_double(cfg.rate.beta));
  rep.config.emplace_back("s", format_double(cfg.rate.s));
  rep.config.emplace_back("rho", format_double(cfg.rate.rho));
  rep.config.emplace_back("moment_bound", format_double(cfg.rate.moment_bound));
  rep.config.emplace_back("alpha_constant", format_double(cfg.rate.alpha_constant));
  rep.config.emplace_back("lengthscale", format_double(cfg.lengthscale));
  rep.config.emplace_back("amplitude", format_double(cfg.amplitude));
  rep.config.emplace_back("noise_sd", format_double(cfg.noise_sd));
  rep.config.emplace_back("order", "2");
  rep.config.emplace_back("eta", "0.5");
  rep.config.emplace_back("scaled_variance", cfg.scaled_variance ? "1" : "0");

  const int threads = resolve_threads(cfg.threads);
  const StencilFamily family = canonical_family(kMaxSupportedOrder);
  const std::vector<Stencil> binomials = binomial_stencils(kMaxSupportedOrder);
  const PenaltyMatrix penalty = blended_penalty(family, binomials, 2, 0.5, cfg.d);
  const std::vector<double> truth = sinusoid(cfg.d);
  const double rate_exponent = -1.0 / (2.0 * cfg.rate.beta + cfg.rate.s);

  struct Point {
    double mse = 0.0, bias2 = 0.0, var = 0.0;
    double raw_mse = 0.0, raw_bias2 = 0.0, raw_var = 0.0;
  };
  std::vector<Point> points(cfg.n_list.size());

  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const int n = cfg.n_list[ni];
    const double alpha_n =
        cfg.rate.alpha_constant * std::pow(static_cast<double>(n), rate_exponent);
    const Smoother smoother = Smoother::make(penalty, alpha_n);

    std::vector<Point> reps(static_cast<std::size_t>(cfg.n_reps));
    parallel_for(cfg.n_reps, threads, [&](int r) {
      const CurveBatch batch =
          gp_batch(n, cfg.d, cfg.lengthscale, cfg.noise_sd,
                   rng::derive_stream(cfg.seed, kTagConvergence, ni,
                                      static_cast<std::uint64_t>(r)),
                   cfg.amplitude);
      const std::size_t dd = static_cast<std::size_t>(cfg.d);
      std::vector<double> smoothed(static_cast<std::size_t>(n) * dd);
      std::vector<double> smooth_mean(dd, 0.0), raw_mean(dd, 0.0);
      for (int i = 0; i < n; ++i) {
        const auto row = batch.row(i);
        std::vector<double> si = smoother.apply(row);
        std::copy(si.begin(), si.end(), smoothed.begin() + static_cast<std::size_t>(i) * dd);
        for (std::size_t t = 0; t < dd; ++t) {
          smooth_mean[t] += si[t];
          raw_mean[t] += row[t];
        }
      }
      for (std::size_t t = 0; t < dd; ++t) {
        smooth_mean[t] /= n;
        raw_mean[t] /= n;
      }

      Point p;
      p.bias2 = kernels::sum_sq_diff(smooth_mean, truth) / cfg.d;
      p.raw_bias2 = kernels::sum_sq_diff(raw_mean, truth) / cfg.d;
      double disp = 0.0, raw_disp = 0.0;
      for (int i = 0; i < n; ++i) {
        disp += kernels::sum_sq_diff(
            {smoothed.data() + static_cast<std::size_t>(i) * dd, dd}, smooth_mean);
        raw_disp += kernels::sum_sq_diff(batch.row(i), raw_mean);
      }
      p.var = disp / (static_cast<double>(n) * cfg.d);
      p.raw_var = raw_disp / (static_cast<double>(n) * cfg.d);
      if (cfg.scaled_variance) {
        p.var /= n;
        p.raw_var /= n;
      }
      p.mse = p.bias2 + p.var;
      p.raw_mse = p.raw_bias2 + p.raw_var;
      reps[static_cast<std::size_t>(r)] = p;
    });

    Point avg;
    for (const Point& p : reps) {
      avg.mse += p.mse;
      avg.bias2 += p.bias2;
      avg.var += p.var;
      avg.raw_mse += p.raw_mse;
      avg.raw_bias2 += p.raw_bias2;
      avg.raw_var += p.raw_var;
    }
    const double inv = 1.0 / cfg.n_reps;
    avg.mse *= inv;
    avg.bias2 *= inv;
    avg.var *= inv;
    avg.raw_mse *= inv;
    avg.raw_bias2 *= inv;
    avg.raw_var *= inv;
    points[ni] = avg;
  }

  // log-log series, least-squares fits, and the report payload
  std::vector<double> log_n(cfg.n_list.size());
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i)
    log_n[i] = std::log10(static_cast<double>(cfg.n_list[i]));

  auto add_series = [&](const std::string& key, const std::function<double(const Point&)>& get) {
    std::vector<double> log_v(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) log_v[i] = std::log10(get(points[i]));
    const LineFit fit = fit_line(log_n, log_v);
    std::vector<PlotPoint> series(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      series[i] = {log_n[i], log_v[i], fit.intercept + fit.slope * log_n[i]};
    rep.plots[key] = std::move(series);
    rep.diagnostics.emplace_back("slope_" + key, fit.slope);
    rep.diagnostics.emplace_back("r2_" + key, fit.r2);
  };
  add_series("mse", [](const Point& p) { return p.mse; });
  add_series("bias2", [](const Point& p) { return p.bias2; });
  add_series("var", [](const Point& p) { return p.var; });
  add_series("msebias", [](const Point& p) { return p.mse * p.bias2; });
  add_series("mse_raw", [](const Point& p) { return p.raw_mse; });
  add_series("bias2_raw", [](const Point& p) { return p.raw_bias2; });
  add_series("var_raw", [](const Point& p) { return p.raw_var; });

  rep.table_header = {"n", "mse", "bias2", "var", "raw_mse", "raw_bias2", "raw_var"};
  for (std::size_t i = 0; i < points.size(); ++i)
    rep.table.push_back({std::to_string(cfg.n_list[i]), format_double(points[i].mse),
                         format_double(points[i].bias2), format_double(points[i].var),
                         format_double(points[i].raw_mse), format_double(points[i].raw_bias2),
                         format_double(points[i].raw_var)});

  rep.runtime_seconds = watch.seconds();
  return rep;
}

ExperimentReport run_energy_decomposition(const EnergyConfig& cfg) {
  Stopwatch watch;
  if (cfg.d < 11) throw invalid_parameter("energy: need d >= 11 for the widest stencil");
  if (cfg.n_draws < 2) throw invalid_parameter("energy: need at least 2 draws");

  ExperimentReport rep;
  rep.name = "energy";
  push_common_config(rep, cfg.seed);
  rep.config.emplace_back("n_draws", std::to_string(cfg.n_draws));
  rep.config.emplace_back("d", std::to_string(cfg.d));

  const StencilFamily family = canonical_family(kMaxSupportedOrder);
  const int d = cfg.d;
  const int n_orders = kMaxSupportedOrder + 1;

  std::vector<double> energy_sum(static_cast<std::size_t>(n_orders), 0.0);

  struct Pair {
    int r, s, l_max, n_centers;
    std::vector<double> sum_a, sum_b, sum_ab;
  };
  std::vector<Pair> pairs;
  for (int r = 0; r < n_orders; ++r)
    for (int s = r + 1; s < n_orders; ++s) {
      Pair p;
      p.r = r;
      p.s = s;
      p.l_max = std::max(family.member(r).half_width, family.member(s).half_width);
      p.n_centers = d - 2 * p.l_max;
      p.sum_a.assign(static_cast<std::size_t>(p.n_centers), 0.0);
      p.sum_b.assign(static_cast<std::size_t>(p.n_centers), 0.0);
      p.sum_ab.assign(static_cast<std::size_t>(p.n_centers), 0.0);
      pairs.push_back(std::move(p));
    }

  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> outs(static_cast<std::size_t>(n_orders));
  for (long draw = 0; draw < cfg.n_draws; ++draw) {
    auto gen = rng::Xoshiro256pp::stream(cfg.seed, kTagEnergy,
                                         static_cast<std::uint64_t>(draw));
    for (double& v : x) v = gen.normal();
    for (int r = 0; r < n_orders; ++r) {
      outs[static_cast<std::size_t>(r)] = apply_stencil(family.member(r), x);
      energy_sum[static_cast<std::size_t>(r)] +=
          kernels::sum_sq(outs[static_cast<std::size_t>(r)]);
    }
    for (Pair& p : pairs) {
      const auto& ya = outs[static_cast<std::size_t>(p.r)];
      const auto& yb = outs[static_cast<std::size_t>(p.s)];
      const int off_a = p.l_max - family.member(p.r).half_width;
      const int off_b = p.l_max - family.member(p.s).half_width;
      for (int c = 0; c < p.n_centers; ++c) {
        const double a = ya[static_cast<std::size_t>(c + off_a)];
        const double b = yb[static_cast<std::size_t>(c + off_b)];
        p.sum_a[static_cast<std::size_t>(c)] += a;
        p.sum_b[static_cast<std::size_t>(c)] += b;
        p.sum_ab[static_cast<std::size_t>(c)] += a * b;
      }
    }
  }

  rep.table_header = {"r", "exact", "mc", "rel_error"};
  const double inv_draws = 1.0 / static_cast<double>(cfg.n_draws);
  for (int r = 0; r < n_orders; ++r) {
    const double exact = d - 2 * family.member(r).half_width;
    const double mc = energy_sum[static_cast<std::size_t>(r)] * inv_draws;
    const double rel = std::fabs(mc - exact) / exact;
    rep.table.push_back({std::to_string(r), format_double(exact), format_double(mc),
                         format_double(rel)});
    rep.diagnostics.emplace_back("rel_error_r" + std::to_string(r), rel);
  }

  double worst_cov = 0.0;
  for (const Pair& p : pairs) {
    double pair_worst = 0.0;
    for (int c = 0; c < p.n_centers; ++c) {
      const double ma = p.sum_a[static_cast<std::size_t>(c)] * inv_draws;
      const double mb = p.sum_b[static_cast<std::size_t>(c)] * inv_draws;
      const double cov = (p.sum_ab[static_cast<std::size_t>(c)] -
                          static_cast<double>(cfg.n_draws) * ma * mb) /
                         (static_cast<double>(cfg.n_draws) - 1.0);
      pair_worst = std::max(pair_worst, std::fabs(cov));
    }
    rep.diagnostics.emplace_back(
        "max_abs_crosscov_" + std::to_string(p.r) + "_" + std::to_string(p.s), pair_worst);
    worst_cov = std::max(worst_cov, pair_worst);
  }
  rep.diagnostics.emplace_back("max_abs_crosscov", worst_cov);

  rep.runtime_seconds = watch.seconds();
  return rep;
}

ContrastResult run_contrast_linearity(const LinearityConfig& cfg) {
  if (cfg.n < 2) throw invalid_parameter("linearity: need n >= 2");
  if (cfg.d < 11) throw invalid_parameter("linearity: need d >= 11");

  const StencilFamily family = canonical_family(kMaxSupportedOrder);
  const std::vector<Stencil> binomials = binomial_stencils(kMaxSupportedOrder);
  const Smoother smoother =
      Smoother::make(blended_penalty(family, binomials, cfg.order, cfg.eta, cfg.d), cfg.alpha);

  const std::vector<double> location = sinusoid(cfg.d);
  std::vector<double> shift = cfg.shift;
  if (shift.empty()) {
    shift.resize(static_cast<std::size_t>(cfg.d));
    for (int t = 0; t < cfg.d; ++t)
      shift[static_cast<std::size_t>(t)] =
          std::sin(2.0 * std::numbers::pi * (t + 1) / cfg.d);
    const double norm = std::sqrt(kernels::sum_sq(shift));
    for (double& v : shift) v /= norm;
  } else if (static_cast<int>(shift.size()) != cfg.d) {
    throw invalid_parameter("linearity: shift length does not match d");
  }

  const double root_n = std::sqrt(static_cast<double>(cfg.n));
  std::vector<double> shifted_location(static_cast<std::size_t>(cfg.d));
  for (int t = 0; t < cfg.d; ++t)
    shifted_location[static_cast<std::size_t>(t)] =
        location[static_cast<std::size_t>(t)] + shift[static_cast<std::size_t>(t)] / root_n;

  const std::vector<double> s_location = smoother.apply(location);
  const std::vector<double> s_shifted = smoother.apply(shifted_location);
  const std::vector<double> s_shift = smoother.apply(shift);

  ContrastResult result;
  result.n = cfg.n;
  result.d = cfg.d;
  result.h_values.resize(static_cast<std::size_t>(cfg.n) * cfg.d);
  std::vector<double> sum_base(static_cast<std::size_t>(cfg.d), 0.0);
  std::vector<double> sum_shifted(static_cast<std::size_t>(cfg.d), 0.0);

  std::vector<double> x(static_cast<std::size_t>(cfg.d));
  for (int i = 0; i < cfg.n; ++i) {
    auto gen = rng::Xoshiro256pp::stream(cfg.seed, kTagLinearity,
                                         static_cast<std::uint64_t>(i));
    for (int t = 0; t < cfg.d; ++t)
      x[static_cast<std::size_t>(t)] = location[static_cast<std::size_t>(t)] + gen.normal();
    const std::vector<double> sx = smoother.apply(x);
    for (int t = 0; t < cfg.d; ++t) {
      const double h = sx[static_cast<std::size_t>(t)] - s_location[static_cast<std::size_t>(t)];
      result.h_values[static_cast<std::size_t>(i) * cfg.d + t] = h;
      sum_base[static_cast<std::size_t>(t)] += h;
      sum_shifted[static_cast<std::size_t>(t)] +=
          sx[static_cast<std::size_t>(t)] - s_shifted[static_cast<std::size_t>(t)];
    }
  }

  result.statistic.resize(static_cast<std::size_t>(cfg.d));
  double resid2 = 0.0;
  for (int t = 0; t < cfg.d; ++t) {
    result.statistic[static_cast<std::size_t>(t)] =
        sum_base[static_cast<std::size_t>(t)] / root_n;
    const double h_shifted = sum_shifted[static_cast<std::size_t>(t)] / root_n;
    const double defect = h_shifted - result.statistic[static_cast<std::size_t>(t)] +
                          s_shift[static_cast<std::size_t>(t)];
    resid2 += defect * defect;
  }
  result.linearity_residual = std::sqrt(resid2);
  return result;
}

ExperimentReport linearity_report(const LinearityConfig& cfg, const ContrastResult& result) {
  ExperimentReport rep;
  rep.name = "linearity";
  push_common_config(rep, cfg.seed);
  rep.config.emplace_back("n", std::to_string(cfg.n));
  rep.config.emplace_back("d", std::to_string(cfg.d));
  rep.config.emplace_back("alpha", format_double(cfg.alpha));
  rep.config.emplace_back("order", std::to_string(cfg.order));
  rep.config.emplace_back("eta", format_double(cfg.eta));

  // standardized column means of the centred contrasts
  double worst_t = 0.0;
  for (int t = 0; t < result.d; ++t) {
    double mean = 0.0;
    for (int i = 0; i < result.n; ++i)
      mean += result.h_values[static_cast<std::size_t>(i) * result.d + t];
    mean /= result.n;
    double ss = 0.0;
    for (int i = 0; i < result.n; ++i) {
      const double c = result.h_values[static_cast<std::size_t>(i) * result.d + t] - mean;
      ss += c * c;
    }
    const double se = std::sqrt(ss / (result.n - 1)) / std::sqrt(static_cast<double>(result.n));
    if (se > 0.0) worst_t = std::max(worst_t, std::fabs(mean) / se);
  }

  rep.diagnostics.emplace_back("linearity_residual", result.linearity_residual);
  rep.diagnostics.emplace_back("max_abs_standardized_mean", worst_t);
  rep.table_header = {"metric", "value"};
  rep.table.push_back({"linearity_residual", format_double(result.linearity_residual)});
  rep.table.push_back({"max_abs_standardized_mean", format_double(worst_t)});
  return rep;
}

std::vector<std::string> write_report(const ExperimentReport& report,
                                      const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory '" + dir + "': " + ec.message());

  std::vector<std::string> written;
  auto open = [&](const std::string& name) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    written.push_back(path);
    return out;
  };

  {
    std::ofstream out = open("report.csv");
    if (!report.cells.empty()) {
      out << "method,noise,d,mse,sd\n";
      for (const ReportCell& c : report.cells)
        out << c.method << ',' << c.noise << ',' << c.d << ',' << format_double(c.mse)
            << ',' << format_double(c.sd) << '\n';
    } else {
      for (std::size_t i = 0; i < report.table_header.size(); ++i) {
        if (i) out << ',';
        out << report.table_header[i];
      }
      out << '\n';
      for (const auto& row : report.table) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (i) out << ',';
          out << row[i];
        }
        out << '\n';
      }
    }
  }
  {
    std::ofstream out = open("config.txt");
    for (const auto& [key, value] : report.config) out << key << '=' << value << '\n';
  }
  if (!report.diagnostics.empty()) {
    std::ofstream out = open("diagnostics.txt");
    for (const auto& [key, value] : report.diagnostics)
      out << key << '=' << format_double(value) << '\n';
  }
  for (const auto& [key, series] : report.plots) {
    std::ofstream out = open("plotdata_" + key + ".tsv");
    out << "log_n\tlog_value\tfit\n";
    for (const PlotPoint& p : series)
      out << format_double(p.log_n) << '\t' << format_double(p.log_value) << '\t'
          << format_double(p.fit) << '\n';
  }
  return written;
}

}  // namespace gridsmooth
