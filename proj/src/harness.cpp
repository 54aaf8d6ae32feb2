#include "dmest/harness.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace dmest {

namespace {

constexpr std::uint64_t kBootstrapStream = 0x626f6f74ULL;
constexpr std::uint64_t kBernsteinStream = 0x6265726eULL;

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

// Runs body(i) for i in [0, count) on `threads` workers. Each index writes
// only its own output slot, so the result is independent of scheduling.
template <class Body>
void parallel_for(std::size_t count, int threads, Body body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double safe_metric(const std::function<double()>& f) {
  try {
    return f();
  } catch (const DomainError&) {
    return kInfinity;
  }
}

double compute_metric(const std::string& name, const DesignDistribution& dist, const DensityMatrix& est,
                      const DensityMatrix& truth) {
  const HermitianMatrix diff = est.matrix() - truth.matrix();
  if (name == "l2pi") return l2_pi_norm(dist, diff);
  if (name == "hs") return frobenius_norm(diff);
  if (name == "trace") return nuclear_norm(diff);
  if (name == "hellinger") return hellinger_sq(est, truth);
  if (name == "kl-sym") return safe_metric([&] { return symmetrized_kl(est, truth); });
  if (name == "fidelity") return fidelity(est, truth);
  throw std::invalid_argument(fmt::format("unknown metric '{}'", name));
}

bool nonincreasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1] + 1e-12 * (1.0 + std::abs(trace[i - 1]))) return false;
  return true;
}

RateContext rate_context(const ExperimentSpec& spec, Index n) {
  RateContext ctx;
  ctx.m = spec.m;
  ctx.n = n;
  ctx.t = spec.t;
  const NoiseModel noise(parse_noise_kind(spec.noise), spec.sigma);
  const NoiseConstants nc = noise_constants(noise);
  ctx.sigma_xi = nc.sigma_xi;
  ctx.c_xi = std::isfinite(nc.c_xi_bound) ? nc.c_xi_bound : nc.c_xi_log;
  ctx.psi1_xi = nc.psi1;
  ctx.D = spec.epsilon.automatic ? spec.epsilon.D : 1.0;
  if (spec.epsilon.automatic && spec.epsilon.flavor == "general") {
    const DesignConstants dc = design_constants(make_design(spec.design, spec.m));
    ctx.sigma_X = dc.sigma_X;
    ctx.sigma_XX = dc.sigma_XX;
    ctx.U = dc.U;
    ctx.E_norm_sq = dc.E_norm_sq;
    ctx.mean_norm = dc.mean_norm;
  }
  return ctx;
}

struct WorkItem {
  ExperimentSpec spec;  // variant for the grid point
  int grid;
  double axis_value;
  Index n;
  int rep;
  double epsilon;  // resolved once per grid point
};

ResultRow run_one(const WorkItem& item, const std::string& spec_hash) {
  const ExperimentSpec& spec = item.spec;
  const auto start = std::chrono::steady_clock::now();
  const DesignDistribution dist = make_design(spec.design, spec.m);
  const DensityMatrix truth = draw_truth(spec, item.rep);
  const NoiseModel noise(parse_noise_kind(spec.noise), spec.sigma);

  ResultRow row;
  row.spec_hash = spec_hash;
  row.grid = item.grid;
  row.axis_value = item.axis_value;
  row.n = item.n;
  row.m = spec.m;
  row.rank = spec.gibbs_spectrum.empty() ? spec.rank : spec.m;
  row.sigma = spec.sigma;
  row.rep = item.rep;
  row.seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(item.grid), static_cast<std::uint64_t>(item.rep)});
  row.epsilon = item.epsilon;

  Rng rng(row.seed);
  const Dataset data = simulate_measurements(truth, dist, noise, item.n, rng, fmt::format("truth-{}", item.rep));
  SolverConfig cfg = spec.solver;
  cfg.epsilon = row.epsilon;
  const EstimateResult fit = solve_entropy_penalized(data, spec.known_design ? &dist : nullptr, cfg);

  row.metric_names = spec.metrics;
  for (const auto& name : spec.metrics) row.metric_values.push_back(compute_metric(name, dist, fit.estimate, truth));
  row.iterations = fit.iterations;
  row.stationarity_residual = fit.stationarity_residual;
  row.tol_stat = fit.tol_stat;
  row.converged = fit.converged;
  row.stop_reason = fit.stop_reason;
  row.objective_monotone = nonincreasing(fit.objective_trace);
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ResultRow> run_items(const std::vector<WorkItem>& items, const std::string& spec_hash, int threads) {
  std::vector<ResultRow> rows(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) { rows[i] = run_one(items[i], spec_hash); });
  return rows;
}

}  // namespace

EpsilonRule EpsilonRule::parse(const std::string& text) {
  EpsilonRule rule;
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw std::invalid_argument(fmt::format("invalid epsilon rule '{}'", text));
    return v;
  };
  if (text.rfind("auto:", 0) == 0) {
    rule.automatic = true;
    const std::string rest = text.substr(5);
    const auto colon = rest.find(':');
    rule.D = to_double(rest.substr(0, colon));
    if (colon != std::string::npos) rule.flavor = rest.substr(colon + 1);
    const auto flavors = epsilon_flavors();
    if (std::find(flavors.begin(), flavors.end(), rule.flavor) == flavors.end())
      throw std::invalid_argument(fmt::format("unknown epsilon flavor '{}' in '{}'", rule.flavor, text));
    if (!(rule.D > 0)) throw std::invalid_argument(fmt::format("epsilon rule '{}': D must be positive", text));
  } else {
    rule.value = to_double(text);
    if (!(rule.value >= 0)) throw std::invalid_argument(fmt::format("epsilon rule '{}': eps must be >= 0", text));
  }
  return rule;
}

std::string EpsilonRule::describe() const {
  if (automatic) return fmt::format("auto:{:.17g}:{}", D, flavor);
  return fmt::format("{:.17g}", value);
}

double EpsilonRule::resolve(const RateContext& ctx) const {
  if (!automatic) return value;
  return D * epsilon_threshold(ctx, flavor);
}

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"l2pi", "hs", "trace", "hellinger", "kl-sym", "fidelity"};
  return names;
}

void ExperimentSpec::validate() const {
  const DesignDistribution dist = make_design(design, m);
  (void)dist;
  parse_noise_kind(noise);
  if (!(sigma >= 0)) throw std::invalid_argument("sigma must be >= 0");
  if (gibbs_spectrum.empty() && (rank < 1 || rank > m))
    throw std::invalid_argument(fmt::format("rank must lie in [1, {}], got {}", m, rank));
  if (!gibbs_spectrum.empty() && static_cast<Index>(gibbs_spectrum.size()) != m)
    throw std::invalid_argument(fmt::format("gibbs spectrum needs {} values, got {}", m, gibbs_spectrum.size()));
  if (spectrum != "exponential" && spectrum != "flat")
    throw std::invalid_argument(fmt::format("spectrum must be exponential or flat, got '{}'", spectrum));
  if (n_values.empty()) throw std::invalid_argument("n values must be non-empty");
  for (Index n : n_values)
    if (n < 1) throw std::invalid_argument(fmt::format("every n must be >= 1, got {}", n));
  if (reps < 1) throw std::invalid_argument(fmt::format("reps must be >= 1, got {}", reps));
  if (!(t > 0)) throw std::invalid_argument("t must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  for (const auto& name : metrics)
    if (std::find(known_metrics().begin(), known_metrics().end(), name) == known_metrics().end())
      throw std::invalid_argument(fmt::format("unknown metric '{}'", name));
  solver.validate();
  if (epsilon.automatic) {
    const auto flavors = epsilon_flavors();
    if (std::find(flavors.begin(), flavors.end(), epsilon.flavor) == flavors.end())
      throw std::invalid_argument(fmt::format("unknown epsilon flavor '{}'", epsilon.flavor));
    if (!(epsilon.D > 0)) throw std::invalid_argument("epsilon D must be positive");
  } else if (!(epsilon.value >= 0)) {
    throw std::invalid_argument("epsilon must be >= 0");
  }
}

std::string ExperimentSpec::canonical() const {
  return fmt::format(
      "design={};m={};rank={};spectrum={};gibbs=[{:.17g}];noise={};sigma={:.17g};n=[{}];epsilon={};t={:.17g};reps={};seed={};"
      "metrics=[{}];known_design={};max_iter={};tol_obj={:.17g};tol_stat={:.17g}",
      design, m, rank, spectrum, fmt::join(gibbs_spectrum, ","), noise, sigma, fmt::join(n_values, ","), epsilon.describe(), t,
      reps, seed, fmt::join(metrics, ","), known_design, solver.max_iter, solver.tol_obj, solver.tol_stat);
}

std::string ExperimentSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

double ResultRow::metric(const std::string& name) const {
  for (std::size_t i = 0; i < metric_names.size(); ++i)
    if (metric_names[i] == name) return metric_values[i];
  throw std::out_of_range(fmt::format("row has no metric '{}'", name));
}

double resolve_epsilon(const ExperimentSpec& spec, Index n) { return spec.epsilon.resolve(rate_context(spec, n)); }

DensityMatrix draw_truth(const ExperimentSpec& spec, int rep) {
  Rng rng(derive_seed(spec.seed, {kTruthStream, static_cast<std::uint64_t>(rep)}));
  if (spec.gibbs_spectrum.empty()) {
    if (spec.spectrum == "exponential") return random_density(spec.m, spec.rank, rng);
    RVector p = RVector::Zero(spec.m);
    p.head(spec.rank).setConstant(1.0 / static_cast<double>(spec.rank));
    return DensityMatrix::from_probabilities(p, random_unitary(spec.m, rng));
  }
  const CMatrix u = random_unitary(spec.m, rng);
  const RVector gammas = Eigen::Map<const RVector>(spec.gibbs_spectrum.data(), spec.m);
  return gibbs_state(HermitianMatrix::from_spectrum(gammas, u));
}

std::vector<ResultRow> run_recovery(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<WorkItem> items;
  for (std::size_t g = 0; g < spec.n_values.size(); ++g) {
    const double eps = resolve_epsilon(spec, spec.n_values[g]);
    for (int r = 0; r < spec.reps; ++r)
      items.push_back({spec, static_cast<int>(g), static_cast<double>(spec.n_values[g]), spec.n_values[g], r, eps});
  }
  return run_items(items, spec.hash(), spec.threads);
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "n") return SweepAxis::n;
  if (name == "rank") return SweepAxis::rank;
  if (name == "m") return SweepAxis::m;
  if (name == "sigma") return SweepAxis::sigma;
  throw std::invalid_argument(fmt::format("unknown sweep axis '{}' (expected n, rank, m or sigma)", name));
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::n: return "n";
    case SweepAxis::rank: return "rank";
    case SweepAxis::m: return "m";
    case SweepAxis::sigma: return "sigma";
  }
  return "?";
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0) throw std::invalid_argument("ols_slope: degenerate x values");
  return sxy / sxx;
}

SweepReport run_scaling_sweep(const ExperimentSpec& spec, SweepAxis axis, std::vector<double> grid, int bootstrap) {
  if (axis == SweepAxis::n && grid.empty())
    for (Index n : spec.n_values) grid.push_back(static_cast<double>(n));
  {
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    const bool distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    if (grid.size() < 3 || !distinct || sorted.front() <= 0)
      throw std::invalid_argument(
          fmt::format("sweep over {} needs >= 3 distinct positive grid values", sweep_axis_name(axis)));
  }
  ExperimentSpec base = spec;
  if (std::find(base.metrics.begin(), base.metrics.end(), "l2pi") == base.metrics.end())
    base.metrics.insert(base.metrics.begin(), "l2pi");

  std::vector<WorkItem> items;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ExperimentSpec v = base;
    Index n = base.n_values.front();
    switch (axis) {
      case SweepAxis::n: n = static_cast<Index>(std::llround(grid[g])); break;
      case SweepAxis::rank: v.rank = static_cast<Index>(std::llround(grid[g])); break;
      case SweepAxis::m: v.m = static_cast<Index>(std::llround(grid[g])); break;
      case SweepAxis::sigma: v.sigma = grid[g]; break;
    }
    v.n_values = {n};
    v.validate();
    const double eps = resolve_epsilon(v, n);
    for (int r = 0; r < v.reps; ++r) items.push_back({v, static_cast<int>(g), grid[g], n, r, eps});
  }

  SweepReport report;
  report.axis = axis;
  report.rows = run_items(items, base.hash(), base.threads);

  std::vector<std::vector<double>> sq(grid.size());
  std::vector<int> failures(grid.size(), 0);
  for (const auto& row : report.rows) {
    const double e = row.metric("l2pi");
    sq[row.grid].push_back(e * e);
    if (!row.converged) ++failures[row.grid];
  }
  std::vector<double> lx, ly;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    report.points.push_back({grid[g], median(sq[g]), quantile(sq[g], 0.25), quantile(sq[g], 0.75), failures[g]});
    lx.push_back(std::log(grid[g]));
    ly.push_back(std::log(report.points.back().median));
  }
  report.slope = ols_slope(lx, ly);

  Rng rng(derive_seed(base.seed, {kBootstrapStream}));
  std::vector<double> slopes;
  for (int b = 0; b < bootstrap; ++b) {
    std::vector<double> by;
    for (const auto& values : sq) {
      std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
      std::vector<double> resample(values.size());
      for (auto& v : resample) v = values[pick(rng)];
      by.push_back(std::log(median(std::move(resample))));
    }
    slopes.push_back(ols_slope(lx, by));
  }
  report.ci_low = bootstrap > 0 ? quantile(slopes, 0.025) : report.slope;
  report.ci_high = bootstrap > 0 ? quantile(slopes, 0.975) : report.slope;
  return report;
}

BernsteinTable run_bernstein_suite(const DesignDistribution& dist, Index n, int reps, std::vector<double> t_grid,
                                   std::uint64_t seed) {
  if (!dist.has_basis())
    throw std::invalid_argument(
        fmt::format("the Bernstein suite needs a bounded basis design, got '{}'", dist.name()));
  if (n < 1 || reps < 1) throw std::invalid_argument("Bernstein suite needs n >= 1 and reps >= 1");
  const Index m = dist.dim();
  const auto& basis = dist.basis();
  const RVector& w = dist.weights();
  HermitianMatrix mean = HermitianMatrix::zero(m);
  for (std::size_t k = 0; k < basis.size(); ++k) mean += w[static_cast<Index>(k)] * basis[k];

  const DesignConstants dc = design_constants(dist);
  BernsteinTable table;
  table.n = n;
  table.m = m;
  table.reps = reps;
  table.sigma_X = dc.sigma_X;
  table.U = dc.U_centered;

  // Sum of basis matrices by draw counts, so each replication costs one
  // eigen-decomposition.
  std::vector<double> deviations(static_cast<std::size_t>(reps));
  std::vector<Index> counts(basis.size());
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, {kBernsteinStream, static_cast<std::uint64_t>(r)}));
    std::fill(counts.begin(), counts.end(), 0);
    for (Index j = 0; j < n; ++j) ++counts[static_cast<std::size_t>(dist.sample_index(rng))];
    CMatrix sum = CMatrix::Zero(m, m);
    for (std::size_t k = 0; k < basis.size(); ++k)
      if (counts[k] != 0) sum += static_cast<double>(counts[k]) * basis[k].mat();
    const HermitianMatrix centered = HermitianMatrix(sum) / static_cast<double>(n) - mean;
    deviations[static_cast<std::size_t>(r)] = operator_norm(centered);
  }
  table.max_deviation = *std::max_element(deviations.begin(), deviations.end());

  if (t_grid.empty()) {
    const double lo = std::max(quantile(deviations, 0.05), 1e-12);
    const double hi = 1.5 * table.max_deviation;
    for (int i = 0; i < 20; ++i) t_grid.push_back(lo + (hi - lo) * i / 19.0);
  }
  for (double t : t_grid) {
    const auto hits = std::count_if(deviations.begin(), deviations.end(), [t](double d) { return d >= t; });
    BernsteinRow row;
    row.t = t;
    row.empirical = static_cast<double>(hits) / reps;
    row.bound = bernstein_tail(static_cast<double>(n) * t, n, m, table.sigma_X, table.U);
    row.slack = row.bound <= 1.0 ? 3.0 * std::sqrt(row.bound * (1.0 - row.bound) / reps) : 0.0;
    row.violation = row.bound <= 1.0 && row.empirical > row.bound + row.slack;
    if (row.violation) ++table.violations;
    table.rows.push_back(row);
  }
  return table;
}

PopulationTable run_population_props(const DesignDistribution& dist, const DensityMatrix& rho,
                                     const std::vector<double>& eps_grid, double slack, SolverConfig cfg) {
  const Index m = rho.dim();
  const HermitianMatrix log_rho = matrix_func(rho.matrix(), MatrixFunction::log, 0.0);
  PopulationTable table;
  table.log_rho_norm = operator_norm(log_rho);
  table.alignment = alignment_coefficient(dist, log_rho);

  const DesignConstants dc = design_constants(dist);
  RateContext ctx;
  ctx.m = m;
  ctx.E_norm_sq = dc.E_norm_sq;
  const SubspaceProjector whole = SubspaceProjector::coordinate(m, m);
  const double lambda_whole = lambda_coefficient(dist, whole);
  const HermitianMatrix hamiltonian = -log_rho;
  const Index r_half = std::max<Index>(1, m / 2);
  const TruncatedHamiltonian low = gibbs_truncate(hamiltonian, r_half);
  const double delta = gibbs_tail(hamiltonian, r_half);
  const double a_low = alignment_coefficient(dist, low.low);

  for (double eps : eps_grid) {
    const EstimateResult fit = solve_population(rho, dist, eps, cfg);
    PopulationRow row{};
    row.epsilon = eps;
    const double l2 = l2_pi_norm(dist, fit.estimate.matrix() - rho.matrix());
    row.l2_sq = l2 * l2;
    row.sym_kl = symmetrized_kl(fit.estimate, rho);

    OracleInfo info;
    info.epsilon = eps;
    info.approx_error_sq = 0.0;
    info.log_S_op = table.log_rho_norm;
    info.a_log_S = table.alignment;
    row.slow_rhs = approx_rhs(ctx, "approx-slow", info);
    row.aligned_lhs = row.l2_sq + 0.5 * eps * row.sym_kl;
    row.aligned_rhs = approx_rhs(ctx, "approx-aligned", info);

    info.lambda_L = lambda_whole;
    info.rank = static_cast<double>(m);
    row.lowrank_ratio = row.l2_sq / approx_rhs(ctx, "approx-lowrank", info);

    OracleInfo gibbs;
    gibbs.epsilon = eps;
    gibbs.approx_error_sq = 0.0;
    gibbs.max_diag_moment = dc.max_diag_moment;
    gibbs.delta_r = delta;
    gibbs.a_H_low = a_low;
    row.gibbs_ratio = row.l2_sq / approx_rhs(ctx, "approx-gibbs", gibbs);

    row.residual = fit.stationarity_residual;
    row.tol_stat = fit.tol_stat;
    row.converged = fit.converged;
    row.objective_monotone = nonincreasing(fit.objective_trace);
    if (row.l2_sq > row.slow_rhs + slack) table.slow_holds = false;
    if (row.aligned_lhs > row.aligned_rhs + slack) table.aligned_holds = false;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace dmest
