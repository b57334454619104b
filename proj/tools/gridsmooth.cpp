// gridsmooth command line: stencil inspection, data generation, smoothing,
// GCV selection, and the experiment harness.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gridsmooth/csv.hpp"
#include "gridsmooth/experiments.hpp"
#include "gridsmooth/kernels.hpp"
#include "gridsmooth/rng.hpp"
#include "gridsmooth/smoother.hpp"

namespace gs = gridsmooth;

namespace {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_grid_spec(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  if (std::sscanf(spec.c_str(), "%lf,%lf,%d", &lo, &hi, &count) != 3)
    throw usage_error("--alpha-grid expects min,max,count");
  if (!(lo > 0.0) || !(hi >= lo) || count < 1)
    throw usage_error("--alpha-grid expects 0 < min <= max and count >= 1");
  return gs::log_grid(lo, hi, count);
}

double parse_eta(const std::string& text, bool* is_auto) {
  *is_auto = text == "auto";
  if (*is_auto) return 0.5;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw usage_error("--eta expects a number or 'auto'");
  if (!(v >= 0.0 && v <= 1.0)) throw usage_error("--eta must lie in [0, 1]");
  return v;
}

std::string truth_path_for(const std::string& out) {
  const std::string suffix = ".csv";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
    return out.substr(0, out.size() - suffix.size()) + ".truth.csv";
  return out + ".truth.csv";
}

gs::NoiseDistribution parse_noise_name(const std::string& name) {
  if (name == "gaussian") return gs::NoiseDistribution::gaussian;
  if (name == "laplace") return gs::NoiseDistribution::laplace;
  if (name == "student_t") return gs::NoiseDistribution::student_t;
  throw usage_error("--noise expects gaussian|laplace|student_t");
}

void write_batch_or_stdout(const gs::CurveBatch& batch, const std::string& out,
                           bool header) {
  if (out.empty()) {
    for (int i = 0; i < batch.n; ++i) {
      const auto row = batch.row(i);
      for (int j = 0; j < batch.d; ++j) {
        if (j) std::fputc(',', stdout);
        std::fputs(gs::format_double(row[static_cast<std::size_t>(j)]).c_str(), stdout);
      }
      std::fputc('\n', stdout);
    }
  } else {
    gs::write_curves(out, batch, header);
  }
}

// ---- subcommand runners ----

int run_stencil(int max_order) {
  const gs::StencilFamily family = gs::canonical_family(max_order);
  for (const gs::Stencil& s : family.members) std::puts(s.serialize().c_str());
  return 0;
}

struct GenerateArgs {
  std::string kind = "sinusoid";
  int d = 100;
  int n = 1;
  std::string noise_name = "gaussian";
  double sigma = 0.0;
  double mix_white = 0.7;
  double mix_cumulative = 0.3;
  double dof = 5.0;
  double lengthscale = 0.1;
  double amplitude = 1.0;
  double noise_sd = 0.2;
  std::uint64_t seed = 42;
  std::string out;
  bool no_header = false;
};

int run_generate(const GenerateArgs& args) {
  gs::CurveBatch batch;
  if (args.kind == "gp") {
    batch = gs::gp_batch(args.n, args.d, args.lengthscale, args.noise_sd, args.seed,
                         args.amplitude);
  } else {
    std::vector<double> truth = args.kind == "irregular"
                                    ? gs::irregular_curve(args.d, gs::rng::derive_stream(
                                                                      args.seed, 0x9001))
                                    : gs::sinusoid(args.d);
    batch.n = args.n;
    batch.d = args.d;
    batch.seed = args.seed;
    batch.values.resize(static_cast<std::size_t>(args.n) * args.d);
    gs::NoiseSpec spec;
    spec.distribution = parse_noise_name(args.noise_name);
    spec.dof = args.dof;
    spec.mix_white = args.mix_white;
    spec.mix_cumulative = args.mix_cumulative;
    spec.sigma = args.sigma;
    for (int i = 0; i < args.n; ++i) {
      const std::vector<double> eps =
          gs::noise(args.d, spec, gs::rng::derive_stream(args.seed, 0x9002,
                                                         static_cast<std::uint64_t>(i)));
      auto row = batch.row(i);
      for (int t = 0; t < args.d; ++t)
        row[static_cast<std::size_t>(t)] =
            truth[static_cast<std::size_t>(t)] + eps[static_cast<std::size_t>(t)];
    }
    batch.truth = std::move(truth);
  }

  write_batch_or_stdout(batch, args.out, !args.no_header);
  if (!args.out.empty() && batch.truth) {
    gs::CurveBatch truth_batch;
    truth_batch.n = 1;
    truth_batch.d = batch.d;
    truth_batch.values = *batch.truth;
    gs::write_curves(truth_path_for(args.out), truth_batch, !args.no_header);
  }
  return 0;
}

struct SmoothArgs {
  std::string method = "convex";
  int order = 2;
  std::vector<int> orders{4, 3, 2, 1};
  double alpha = 1.0;
  std::vector<double> alphas;
  std::string eta = "0.5";
  bool select = false;
  std::string alpha_grid = "1e-4,1e4,40";
  int n_basis = 25;
  int penalty_order = 2;
  double bandwidth = 0.1;
  std::string input;
  std::string out;
};

int run_smooth(const SmoothArgs& args) {
  bool eta_auto = false;
  const double eta_value = parse_eta(args.eta, &eta_auto);
  const std::vector<double> grid = parse_grid_spec(args.alpha_grid);

  const gs::CurveBatch batch = gs::read_curves(args.input);
  gs::CurveBatch result = batch;

  const gs::StencilFamily family = gs::canonical_family(gs::kMaxSupportedOrder);
  const std::vector<gs::Stencil> binomials = gs::binomial_stencils(gs::kMaxSupportedOrder);

  for (int i = 0; i < batch.n; ++i) {
    const auto curve = batch.row(i);
    const double eta = eta_auto ? gs::eta_heuristic(curve) : eta_value;
    std::vector<double> smoothed;

    if (args.method == "convex") {
      const gs::PenaltyMatrix p =
          gs::blended_penalty(family, binomials, args.order, eta, batch.d);
      const double alpha =
          args.select ? gs::select_alpha(curve, p, grid).alpha_hat : args.alpha;
      smoothed = gs::Smoother::make(p, alpha).apply(curve);
    } else if (args.method == "sequential" || args.method == "simultaneous") {
      gs::PenaltySpec spec;
      spec.orders = args.orders;
      spec.eta = eta;
      spec.mode = args.method == "sequential" ? gs::PenaltyMode::sequential
                                              : gs::PenaltyMode::simultaneous;
      if (args.select) {
        const std::vector<std::vector<double>> grids(spec.orders.size(), grid);
        spec.alphas.assign(spec.orders.size(), 1.0);
        if (spec.mode == gs::PenaltyMode::sequential) {
          smoothed = gs::select_sequential(curve, spec, grids, family, binomials).output;
        } else {
          smoothed = gs::select_simultaneous(curve, spec, grids, family, binomials).output;
        }
      } else {
        spec.alphas = args.alphas.empty()
                          ? std::vector<double>(spec.orders.size(), args.alpha)
                          : args.alphas;
        smoothed = spec.mode == gs::PenaltyMode::sequential
                       ? gs::smooth_sequential(curve, spec, family, binomials).output
                       : gs::smooth_simultaneous(curve, spec, family, binomials);
      }
    } else if (args.method == "fourier" || args.method == "bspline") {
      const gs::BasisKind kind =
          args.method == "fourier" ? gs::BasisKind::fourier : gs::BasisKind::bspline;
      smoothed = gs::fit_basis(kind, args.n_basis, args.penalty_order, args.alpha, curve);
    } else if (args.method == "kernel") {
      smoothed = gs::kernel_smooth(curve, args.bandwidth);
    } else {
      throw usage_error("unknown --method '" + args.method + "'");
    }
    std::copy(smoothed.begin(), smoothed.end(), result.row(i).begin());
  }

  write_batch_or_stdout(result, args.out, true);
  return 0;
}

struct SelectArgs {
  std::string mode = "single";
  int order = 2;
  std::vector<int> orders{4, 3, 2, 1};
  std::string eta = "0.5";
  std::string alpha_grid = "1e-4,1e4,40";
  std::string input;
};

int run_select(const SelectArgs& args) {
  bool eta_auto = false;
  const double eta_value = parse_eta(args.eta, &eta_auto);
  const std::vector<double> grid = parse_grid_spec(args.alpha_grid);

  const gs::CurveBatch batch = gs::read_curves(args.input);
  const gs::StencilFamily family = gs::canonical_family(gs::kMaxSupportedOrder);
  const std::vector<gs::Stencil> binomials = gs::binomial_stencils(gs::kMaxSupportedOrder);

  std::printf("curve,order,alpha,score,edf\n");
  for (int i = 0; i < batch.n; ++i) {
    const auto curve = batch.row(i);
    const double eta = eta_auto ? gs::eta_heuristic(curve) : eta_value;
    if (args.mode == "single") {
      const gs::PenaltyMatrix p =
          gs::blended_penalty(family, binomials, args.order, eta, batch.d);
      const gs::SelectionResult r = gs::select_alpha(curve, p, grid);
      std::printf("%d,%d,%s,%s,%s\n", i, args.order, gs::format_double(r.alpha_hat).c_str(),
                  gs::format_double(r.score).c_str(),
                  gs::format_double(r.effective_df).c_str());
    } else if (args.mode == "sequential") {
      gs::PenaltySpec spec;
      spec.orders = args.orders;
      spec.eta = eta;
      spec.alphas.assign(spec.orders.size(), 1.0);
      spec.mode = gs::PenaltyMode::sequential;
      const std::vector<std::vector<double>> grids(spec.orders.size(), grid);
      const gs::SequentialSelection sel =
          gs::select_sequential(curve, spec, grids, family, binomials);
      for (std::size_t k = 0; k < sel.steps.size(); ++k)
        std::printf("%d,%d,%s,%s,%s\n", i, spec.orders[k],
                    gs::format_double(sel.steps[k].alpha_hat).c_str(),
                    gs::format_double(sel.steps[k].score).c_str(),
                    gs::format_double(sel.steps[k].effective_df).c_str());
    } else if (args.mode == "simultaneous") {
      gs::PenaltySpec spec;
      spec.orders = args.orders;
      spec.eta = eta;
      spec.alphas.assign(spec.orders.size(), 1.0);
      spec.mode = gs::PenaltyMode::simultaneous;
      const std::vector<std::vector<double>> grids(spec.orders.size(), grid);
      const gs::SimultaneousSelection sel =
          gs::select_simultaneous(curve, spec, grids, family, binomials);
      for (std::size_t k = 0; k < sel.alphas.size(); ++k)
        std::printf("%d,%d,%s,%s,%s\n", i, spec.orders[k],
                    gs::format_double(sel.alphas[k]).c_str(),
                    gs::format_double(sel.score).c_str(),
                    gs::format_double(sel.effective_df).c_str());
    } else {
      throw usage_error("unknown --mode '" + args.mode + "'");
    }
  }
  return 0;
}

struct ExperimentArgs {
  std::string name;
  std::string out;
  int reps = 0;  // 0: experiment default
  std::uint64_t seed = 42;
  int threads = 0;
  bool scaled_variance = false;
  int d = 0;
  double sigma = -1.0;
  double noise_sd = -1.0;
  std::vector<int> n_list;
  std::vector<int> d_list;
  long draws = 0;
};

int run_experiment(const ExperimentArgs& args) {
  gs::ExperimentReport report;
  if (args.name == "table1") {
    gs::Table1Config cfg;
    if (args.reps > 0) cfg.n_reps = args.reps;
    if (args.d > 0) cfg.d = args.d;
    if (args.sigma >= 0.0) cfg.sigma = args.sigma;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    report = gs::run_table1(cfg);
  } else if (args.name == "table2") {
    gs::Table2Config cfg;
    if (args.reps > 0) cfg.n_reps = args.reps;
    if (!args.d_list.empty()) cfg.d_list = args.d_list;
    if (args.noise_sd >= 0.0) cfg.noise_sd = args.noise_sd;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    report = gs::run_table2(cfg);
  } else if (args.name == "convergence") {
    gs::ConvergenceConfig cfg;
    if (args.reps > 0) cfg.n_reps = args.reps;
    if (!args.n_list.empty()) cfg.n_list = args.n_list;
    if (args.d > 0) cfg.d = args.d;
    if (args.noise_sd >= 0.0) cfg.noise_sd = args.noise_sd;
    cfg.scaled_variance = args.scaled_variance;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    report = gs::run_convergence(cfg);
  } else if (args.name == "energy") {
    gs::EnergyConfig cfg;
    if (args.draws > 0) cfg.n_draws = args.draws;
    if (args.d > 0) cfg.d = args.d;
    cfg.seed = args.seed;
    report = gs::run_energy_decomposition(cfg);
  } else if (args.name == "linearity") {
    gs::LinearityConfig cfg;
    if (args.d > 0) cfg.d = args.d;
    if (args.reps > 0) cfg.n = args.reps;
    cfg.seed = args.seed;
    report = gs::linearity_report(cfg, gs::run_contrast_linearity(cfg));
  } else {
    throw usage_error("unknown experiment '" + args.name + "'");
  }

  const std::vector<std::string> paths = gs::write_report(report, args.out);
  std::printf("experiment %s finished in %.2f s (%s kernels)\n", report.name.c_str(),
              report.runtime_seconds, std::string(gs::kernels::active_backend()).c_str());
  for (const std::string& p : paths) std::printf("wrote %s\n", p.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete penalized smoothing with calibrated difference penalties"};
  app.require_subcommand(1);

  int stencil_max_order = gs::kMaxSupportedOrder;
  CLI::App* stencil_cmd = app.add_subcommand("stencil", "print the calibrated stencils");
  stencil_cmd->add_option("--max-order", stencil_max_order, "highest order to print");

  GenerateArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("generate", "generate curve data as CSV");
  gen_cmd->add_option("--kind", gen.kind, "curve kind")
      ->check(CLI::IsMember({"irregular", "sinusoid", "gp"}));
  gen_cmd->add_option("--d", gen.d, "grid size");
  gen_cmd->add_option("--n", gen.n, "number of curves");
  gen_cmd->add_option("--noise", gen.noise_name, "noise family")
      ->check(CLI::IsMember({"gaussian", "laplace", "student_t"}));
  gen_cmd->add_option("--sigma", gen.sigma, "noise scale");
  gen_cmd->add_option("--mix-white", gen.mix_white, "white mixture weight");
  gen_cmd->add_option("--mix-cumulative", gen.mix_cumulative, "cumulative mixture weight");
  gen_cmd->add_option("--dof", gen.dof, "Student-t degrees of freedom");
  gen_cmd->add_option("--lengthscale", gen.lengthscale, "gp kernel lengthscale");
  gen_cmd->add_option("--amplitude", gen.amplitude, "gp kernel amplitude");
  gen_cmd->add_option("--noise-sd", gen.noise_sd, "gp measurement noise sd");
  gen_cmd->add_option("--seed", gen.seed, "rng seed");
  gen_cmd->add_option("--out", gen.out, "output CSV (stdout when omitted)");
  gen_cmd->add_flag("--no-header", gen.no_header, "omit the t1..td header row");

  SmoothArgs smooth;
  CLI::App* smooth_cmd = app.add_subcommand("smooth", "smooth curves from a CSV file");
  smooth_cmd->add_option("--method", smooth.method, "smoothing method")
      ->check(CLI::IsMember(
          {"convex", "sequential", "simultaneous", "fourier", "bspline", "kernel"}));
  smooth_cmd->add_option("--order", smooth.order, "difference order (convex)");
  smooth_cmd->add_option("--orders", smooth.orders, "orders, highest first")->delimiter(',');
  smooth_cmd->add_option("--alpha", smooth.alpha, "penalty strength");
  smooth_cmd->add_option("--alphas", smooth.alphas, "per-order penalty strengths")
      ->delimiter(',');
  smooth_cmd->add_option("--eta", smooth.eta, "blend weight in [0,1] or 'auto'");
  smooth_cmd->add_flag("--select", smooth.select, "pick alpha by GCV on a grid");
  smooth_cmd->add_option("--alpha-grid", smooth.alpha_grid, "GCV grid min,max,count");
  smooth_cmd->add_option("--n-basis", smooth.n_basis, "basis size (fourier/bspline)");
  smooth_cmd->add_option("--penalty-order", smooth.penalty_order,
                         "derivative order penalized (fourier/bspline)");
  smooth_cmd->add_option("--bandwidth", smooth.bandwidth, "kernel bandwidth");
  smooth_cmd->add_option("--out", smooth.out, "output CSV (stdout when omitted)");
  smooth_cmd->add_option("input", smooth.input, "input CSV")->required();

  SelectArgs select;
  CLI::App* select_cmd = app.add_subcommand("select", "GCV selection report");
  select_cmd->add_option("--mode", select.mode, "selection mode")
      ->check(CLI::IsMember({"single", "sequential", "simultaneous"}));
  select_cmd->add_option("--order", select.order, "difference order (single)");
  select_cmd->add_option("--orders", select.orders, "orders, highest first")->delimiter(',');
  select_cmd->add_option("--eta", select.eta, "blend weight in [0,1] or 'auto'");
  select_cmd->add_option("--alpha-grid", select.alpha_grid, "grid min,max,count");
  select_cmd->add_option("input", select.input, "input CSV")->required();

  ExperimentArgs exp;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "run a benchmark study");
  exp_cmd->add_option("--name", exp.name, "experiment name")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "convergence", "energy", "linearity"}));
  exp_cmd->add_option("--out", exp.out, "output directory")->required();
  exp_cmd->add_option("--reps", exp.reps, "replications (or draws for linearity)");
  exp_cmd->add_option("--seed", exp.seed, "rng seed");
  exp_cmd->add_option("--threads", exp.threads,
                      "worker threads (default: GRIDSMOOTH_THREADS or hardware)");
  exp_cmd->add_flag("--scaled-variance", exp.scaled_variance,
                    "divide the dispersion term by n (convergence)");
  exp_cmd->add_option("--d", exp.d, "grid size override");
  exp_cmd->add_option("--sigma", exp.sigma, "noise scale override (table1)");
  exp_cmd->add_option("--noise-sd", exp.noise_sd, "noise sd override (table2/convergence)");
  exp_cmd->add_option("--n-list", exp.n_list, "sample sizes (convergence)")->delimiter(',');
  exp_cmd->add_option("--d-list", exp.d_list, "grid sizes (table2)")->delimiter(',');
  exp_cmd->add_option("--draws", exp.draws, "Monte Carlo draws (energy)");

  try {
    app.parse(argc, argv);
    if (stencil_cmd->parsed()) return run_stencil(stencil_max_order);
    if (gen_cmd->parsed()) return run_generate(gen);
    if (smooth_cmd->parsed()) return run_smooth(smooth);
    if (select_cmd->parsed()) return run_select(select);
    if (exp_cmd->parsed()) return run_experiment(exp);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gs::invalid_parameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
