// dmest: command-line front end for estimation, simulation and bound evaluation.

#include "dmest/bounds.hpp"
#include "dmest/csv_io.hpp"
#include "dmest/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>

using namespace dmest;

namespace {

struct SpecFlags {
  std::string design = "pauli";
  Index m = 4;
  int k = 0;
  std::vector<Index> n{1000};
  Index rank = 1;
  std::string spectrum = "exponential";
  std::vector<double> gibbs;
  std::string noise = "gaussian";
  double sigma = 0.1;
  std::string epsilon = "auto:1:pauli";
  double t = 1.0;
  int reps = 10;
  std::vector<std::string> metrics{"l2pi", "hs", "trace", "hellinger"};
  bool known_design = false;
  int threads = 1;
  int max_iter = 5000;
  double tol_obj = SolverConfig{}.tol_obj;

  void add_to(CLI::App* app, bool with_reps) {
    app->add_option("--design", design, "mc-uniform, mc-entry, pauli, gauss or rademacher")->capture_default_str();
    app->add_option("--m", m, "matrix dimension")->capture_default_str();
    app->add_option("--k", k, "number of qubits; sets m = 2^k");
    app->add_option("--n", n, "sample size(s)")->capture_default_str();
    app->add_option("--rank", rank, "rank of the random true state")->capture_default_str();
    app->add_option("--spectrum", spectrum, "eigenvalues of the rank-r truth: exponential or flat")
        ->capture_default_str();
    app->add_option("--gibbs-spectrum", gibbs, "true state is a Gibbs state with this Hamiltonian spectrum");
    app->add_option("--noise", noise, "gaussian, uniform or two-point")->capture_default_str();
    app->add_option("--sigma", sigma, "noise standard deviation (gaussian) or bound")->capture_default_str();
    app->add_option("--epsilon", epsilon, "fixed value, or auto:D[:flavor] for D times the rate threshold")
        ->capture_default_str();
    app->add_option("--t", t, "confidence parameter for automatic epsilon")->capture_default_str();
    app->add_flag("--known-design", known_design, "use the known-design objective");
    app->add_option("--max-iter", max_iter, "solver iteration cap")->capture_default_str();
    app->add_option("--tol-obj", tol_obj, "relative objective decrease treated as stagnation")->capture_default_str();
    if (with_reps) {
      app->add_option("--reps", reps, "replications per grid point")->capture_default_str();
      app->add_option("--metrics", metrics, "subset of l2pi, hs, trace, hellinger, kl-sym, fidelity")
          ->capture_default_str();
      app->add_option("--threads", threads, "worker threads")->capture_default_str();
    }
  }

  ExperimentSpec build(std::uint64_t seed, const std::string& out) const {
    ExperimentSpec spec;
    spec.design = design;
    spec.m = k > 0 ? (Index{1} << k) : m;
    spec.rank = rank;
    spec.spectrum = spectrum;
    spec.gibbs_spectrum = gibbs;
    spec.noise = noise;
    spec.sigma = sigma;
    spec.n_values = n;
    spec.epsilon = EpsilonRule::parse(epsilon);
    spec.t = t;
    spec.reps = reps;
    spec.seed = seed;
    spec.out_dir = out;
    spec.metrics = metrics;
    spec.known_design = known_design;
    spec.threads = threads;
    spec.solver.max_iter = max_iter;
    spec.solver.tol_obj = tol_obj;
    spec.validate();
    return spec;
  }
};

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

void print_rows_summary(const std::vector<ResultRow>& rows) {
  int failed = 0;
  for (const auto& r : rows) failed += r.converged ? 0 : 1;
  fmt::print("{} rows, {} without convergence\n", rows.size(), failed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-penalized density matrix estimation: estimates, simulations and bounds"};
  app.set_config("--config", "", "key = value configuration file; flags override file values");
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string out = ".";
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--out", out, "output directory")->capture_default_str();

  // estimate
  auto* est = app.add_subcommand(
      "estimate",
      "Fit one dataset. Writes estimate.csv (columns i,j,re,im of the estimate) and estimate.csv.json "
      "(epsilon, objective, iterations, stationarity_residual, tol_stat, converged, stop_reason). Without --data a "
      "dataset is simulated from the spec flags.");
  SpecFlags est_flags;
  est_flags.reps = 1;
  est_flags.add_to(est, false);
  std::string data_path, save_data;
  est->add_option("--data", data_path, "dataset CSV (j, design_index, y, x0..x(m^2-1)) with optional .json sidecar");
  est->add_option("--save-data", save_data, "write the simulated dataset to this CSV path");

  // simulate
  auto* sim = app.add_subcommand(
      "simulate",
      "Recovery experiment over every n and replication. Writes results.csv with columns spec_hash, grid, "
      "axis_value, n, m, rank, sigma, rep, seed, epsilon, <metrics>, iterations, stationarity_residual, tol_stat, "
      "converged, stop_reason, objective_monotone, wall_time. Metric columns hold norms of the error (l2pi, hs, "
      "trace), H^2 (hellinger), the symmetrized KL divergence (kl-sym) or the fidelity.");
  SpecFlags sim_flags;
  sim_flags.add_to(sim, true);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Scaling sweep: log-log slope of the median squared l2pi error");
  SpecFlags sweep_flags;
  sweep_flags.add_to(sweep, true);
  std::string axis = "n";
  std::vector<double> grid;
  std::vector<double> expect_slope;
  int bootstrap = 200;
  sweep->add_option("--axis", axis, "n, rank, m or sigma")->capture_default_str();
  sweep->add_option("--grid", grid, "axis values (for axis n defaults to --n)");
  sweep->add_option("--bootstrap", bootstrap, "bootstrap resamples for the slope interval")->capture_default_str();
  sweep->add_option("--expect-slope", expect_slope, "fail unless the slope lies in [lo, hi]")->expected(2);

  // bernstein
  auto* bern = app.add_subcommand("bernstein", "Monte-Carlo check of the matrix Bernstein tail bound");
  std::string bern_design = "mc-uniform";
  Index bern_m = 4, bern_n = 50;
  int bern_reps = 10000;
  std::vector<double> t_grid;
  bern->add_option("--design", bern_design, "basis design")->capture_default_str();
  bern->add_option("--m", bern_m, "matrix dimension")->capture_default_str();
  bern->add_option("--n", bern_n, "summands per replication")->capture_default_str();
  bern->add_option("--reps", bern_reps, "replications")->capture_default_str();
  bern->add_option("--t-grid", t_grid, "deviation levels (default: 20 points spanning the observed range)");

  // popcheck
  auto* pop = app.add_subcommand("popcheck", "Population-path checks of the approximation-error bounds");
  std::string pop_design = "pauli";
  Index pop_m = 4;
  std::vector<double> eps_grid{1e-3, 1.93e-3, 3.73e-3, 7.2e-3, 1.39e-2, 2.68e-2, 5.18e-2, 1e-1};
  pop->add_option("--design", pop_design, "design kind")->capture_default_str();
  pop->add_option("--m", pop_m, "matrix dimension")->capture_default_str();
  pop->add_option("--eps-grid", eps_grid, "regularization values")->capture_default_str();

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Evaluate an error bound or the regularization threshold");
  std::string theorem, flavor;
  bool list = false;
  RateContext ctx;
  OracleInfo info;
  std::string ctx_design;
  std::optional<double> o_eps, o_approx, o_rank, o_a, o_tail, o_logop, o_loghs, o_beta, o_lam, o_l2, o_tr, o_delta,
      o_gamma, o_alow, o_diag;
  bnd->add_option("--theorem", theorem, "bound tag (see --list); approx-* tags evaluate approximation bounds");
  bnd->add_option("--epsilon-flavor", flavor, "print D * eps_{n,m} for general, completion, pauli or subgauss");
  bnd->add_flag("--list", list, "list bound tags");
  bnd->add_option("--m", ctx.m)->capture_default_str();
  bnd->add_option("--n", ctx.n)->capture_default_str();
  bnd->add_option("--t", ctx.t)->capture_default_str();
  bnd->add_option("--sigma", ctx.sigma_xi, "noise standard deviation")->capture_default_str();
  bnd->add_option("--c-xi", ctx.c_xi, "noise constant c_xi")->capture_default_str();
  bnd->add_option("--psi1-xi", ctx.psi1_xi, "psi_1 norm of the noise")->capture_default_str();
  bnd->add_flag("--psi1-noise", ctx.psi1_noise, "use the psi_1 replacements of the c_xi terms");
  bnd->add_option("--sigma-x", ctx.sigma_X)->capture_default_str();
  bnd->add_option("--sigma-xx", ctx.sigma_XX)->capture_default_str();
  bnd->add_option("--u", ctx.U)->capture_default_str();
  bnd->add_option("--e-norm-sq", ctx.E_norm_sq)->capture_default_str();
  bnd->add_option("--mean-norm", ctx.mean_norm)->capture_default_str();
  bnd->add_option("--design", ctx_design, "fill the design constants from this design kind");
  bnd->add_option("--C", ctx.C)->capture_default_str();
  bnd->add_option("--D", ctx.D)->capture_default_str();
  bnd->add_option("--lambda", ctx.lambda)->capture_default_str();
  bnd->add_option("--epsilon", o_eps);
  bnd->add_option("--approx-error-sq", o_approx, "||S - rho||^2 in L2(Pi)");
  bnd->add_option("--rank", o_rank, "rank(S) or dim(L)");
  bnd->add_option("--a-log-s", o_a, "alignment coefficient a(log S)");
  bnd->add_option("--tail-norm", o_tail, "||P_perp S P_perp||_1");
  bnd->add_option("--log-s-op", o_logop, "||log S|| (operator norm)");
  bnd->add_option("--log-s-hs", o_loghs, "||log S||_2");
  bnd->add_option("--beta", o_beta, "beta(L)");
  bnd->add_option("--lambda-l", o_lam, "Lambda(L)");
  bnd->add_option("--rho-eps-l2", o_l2, "||rho^eps - rho||_{L2(Pi)}");
  bnd->add_option("--rho-eps-trace", o_tr, "||rho^eps - rho||_1");
  bnd->add_option("--delta-r", o_delta, "Gibbs tail delta_r(H)");
  bnd->add_option("--gamma-r", o_gamma, "||H_{<=r}||_2^2");
  bnd->add_option("--a-h-low", o_alow, "a(H_{<=r})");
  bnd->add_option("--max-diag-moment", o_diag, "max_k E<X e_k, e_k>^2");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*est) {
      ExperimentSpec spec = est_flags.build(seed, out);
      const DesignDistribution dist = make_design(spec.design, spec.m);
      Dataset data;
      if (!data_path.empty()) {
        data = read_dataset(data_path);
      } else {
        Rng rng(derive_seed(seed, {0, 0}));
        const DensityMatrix truth = draw_truth(spec, 0);
        data = simulate_measurements(truth, dist, NoiseModel(parse_noise_kind(spec.noise), spec.sigma),
                                     spec.n_values.front(), rng, "truth-0");
        if (!save_data.empty()) write_dataset(data, save_data);
      }
      if (data.dim() != spec.m)
        throw std::invalid_argument(fmt::format("dataset dimension {} differs from --m {}", data.dim(), spec.m));
      SolverConfig cfg = spec.solver;
      cfg.epsilon = resolve_epsilon(spec, data.size());
      const EstimateResult fit = solve_entropy_penalized(data, spec.known_design ? &dist : nullptr, cfg);
      const std::string path = out_path(out, "estimate.csv");
      write_estimate(fit, cfg.epsilon, path);
      fmt::print("epsilon={:.6g} iterations={} residual={:.3g} tol={:.3g} converged={} stop={} -> {}\n", cfg.epsilon,
                 fit.iterations, fit.stationarity_residual, fit.tol_stat, fit.converged, fit.stop_reason, path);
      return fit.converged ? 0 : 1;
    }
    if (*sim) {
      const ExperimentSpec spec = sim_flags.build(seed, out);
      const auto rows = run_recovery(spec);
      const std::string path = out_path(out, "results.csv");
      emit_csv(rows, spec.metrics, path);
      print_rows_summary(rows);
      fmt::print("spec {} -> {}\n", spec.hash(), path);
      return 0;
    }
    if (*sweep) {
      const ExperimentSpec spec = sweep_flags.build(seed, out);
      const SweepReport report = run_scaling_sweep(spec, parse_sweep_axis(axis), grid, bootstrap);
      std::vector<std::string> metrics = spec.metrics;
      if (std::find(metrics.begin(), metrics.end(), "l2pi") == metrics.end()) metrics.insert(metrics.begin(), "l2pi");
      emit_csv(report.rows, metrics, out_path(out, "sweep.csv"));
      emit_plotdata(report, out_path(out, "plotdata.csv"));
      std::cout << plotdata_csv(report);
      fmt::print("slope={:.4f} ci=[{:.4f}, {:.4f}]\n", report.slope, report.ci_low, report.ci_high);
      if (expect_slope.size() == 2) {
        const bool ok = report.slope >= expect_slope[0] && report.slope <= expect_slope[1];
        fmt::print("{}: slope in [{}, {}]\n", ok ? "PASS" : "FAIL", expect_slope[0], expect_slope[1]);
        return ok ? 0 : 1;
      }
      return 0;
    }
    if (*bern) {
      const DesignDistribution dist = make_design(bern_design, bern_m);
      const BernsteinTable table = run_bernstein_suite(dist, bern_n, bern_reps, t_grid, seed);
      const std::string path = out_path(out, "bernstein.csv");
      write_text(path, bernstein_csv(table));
      std::cout << bernstein_csv(table);
      fmt::print("sigma_X={:.6g} U={:.6g} violations={}\n", table.sigma_X, table.U, table.violations);
      return table.violations == 0 ? 0 : 1;
    }
    if (*pop) {
      const DesignDistribution dist = make_design(pop_design, pop_m);
      Rng rng(derive_seed(seed, {kTruthStream, 0}));
      const DensityMatrix rho = random_density(pop_m, pop_m, rng);
      const PopulationTable table = run_population_props(dist, rho, eps_grid);
      write_text(out_path(out, "popcheck.csv"), population_csv(table));
      std::cout << population_csv(table);
      fmt::print("||log rho||={:.6g} a(log rho)={:.6g} slow={} aligned={}\n", table.log_rho_norm, table.alignment,
                 table.slow_holds ? "holds" : "violated", table.aligned_holds ? "holds" : "violated");
      return table.slow_holds && table.aligned_holds ? 0 : 1;
    }
    if (*bnd) {
      if (list) {
        for (const auto& tag : bound_tags()) fmt::print("{}: {}\n", tag, bound_description(tag));
        fmt::print("approx-slow, approx-aligned, approx-lowrank, approx-gibbs: approximation error bounds\n");
        return 0;
      }
      if (!ctx_design.empty()) {
        const DesignConstants dc = design_constants(make_design(ctx_design, ctx.m));
        ctx.sigma_X = dc.sigma_X;
        ctx.sigma_XX = dc.sigma_XX;
        ctx.U = dc.U;
        ctx.E_norm_sq = dc.E_norm_sq;
        ctx.mean_norm = dc.mean_norm;
      }
      if (!flavor.empty()) {
        fmt::print("{:.17g}\n", ctx.D * epsilon_threshold(ctx, flavor));
        return 0;
      }
      if (theorem.empty()) throw std::invalid_argument("bounds needs --theorem, --epsilon-flavor or --list");
      info.epsilon = o_eps;
      info.approx_error_sq = o_approx;
      info.rank = o_rank;
      info.a_log_S = o_a;
      info.tail_norm = o_tail;
      info.log_S_op = o_logop;
      info.log_S_hs = o_loghs;
      info.beta = o_beta;
      info.lambda_L = o_lam;
      info.rho_eps_l2 = o_l2;
      info.rho_eps_trace = o_tr;
      info.delta_r = o_delta;
      info.gamma_r = o_gamma;
      info.a_H_low = o_alow;
      info.max_diag_moment = o_diag;
      if (theorem.rfind("approx-", 0) == 0) {
        fmt::print("{},{:.17g}\n", theorem, approx_rhs(ctx, theorem, info));
        return 0;
      }
      std::cout << bound_report_csv(oracle_rhs(ctx, theorem, info)) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
