#pragma once

// Seeded Monte-Carlo experiments: recovery runs, scaling sweeps, Bernstein
// tail verification and population-path checks.
//
// Seeding. Replication r at grid point g draws its dataset from the stream
// derive_seed(seed, {g, r}); the true state of replication r comes from
// derive_seed(seed, {kTruthStream, r}) and is shared by every grid point, so
// grid points are compared on paired truths. Results do not depend on the
// number of worker threads.

#include "dmest/bounds.hpp"
#include "dmest/designs.hpp"
#include "dmest/estimator.hpp"
#include "dmest/noise.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dmest {

inline constexpr std::uint64_t kTruthStream = 0x7472757468ULL;

/// Either a fixed eps or D * eps_{n,m} for a flavor of epsilon_threshold.
struct EpsilonRule {
  bool automatic = false;
  double value = 0.0;
  double D = 1.0;
  std::string flavor = "pauli";

  /// "0.01", "auto:0.5" or "auto:0.5:subgauss".
  static EpsilonRule parse(const std::string& text);
  std::string describe() const;
  double resolve(const RateContext& ctx) const;
};

/// Metrics a run can report. "l2pi", "hs" and "trace" are norms of the
/// difference; "hellinger" is H^2; "kl-sym" is K(rho_hat; rho) (+inf when
/// either state is singular); "fidelity" is F.
const std::vector<std::string>& known_metrics();

struct ExperimentSpec {
  std::string design = "pauli";
  Index m = 4;
  Index rank = 1;
  /// Eigenvalues of a random rank-r truth: "exponential" (normalized
  /// Exponential(1) weights) or "flat" (all equal to 1/r).
  std::string spectrum = "exponential";
  /// When non-empty, the truth is the Gibbs state of a Hamiltonian with this
  /// spectrum in a random eigenbasis and `rank` is ignored.
  std::vector<double> gibbs_spectrum;
  std::string noise = "gaussian";
  double sigma = 0.1;  ///< noise scale: standard deviation (gaussian) or bound c (uniform, two-point)
  std::vector<Index> n_values{1000};
  EpsilonRule epsilon;
  double t = 1.0;  ///< confidence parameter used by automatic eps
  int reps = 10;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::vector<std::string> metrics{"l2pi", "hs", "trace", "hellinger"};
  bool known_design = false;  ///< use the known-design objective
  int threads = 1;
  SolverConfig solver;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Canonical one-line echo of every field that affects results.
  std::string canonical() const;
  /// 16 hex digits hashing canonical().
  std::string hash() const;
};

struct ResultRow {
  std::string spec_hash;
  int grid = 0;
  double axis_value = 0.0;
  Index n = 0;
  Index m = 0;
  Index rank = 0;
  double sigma = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::vector<std::string> metric_names;
  std::vector<double> metric_values;
  int iterations = 0;
  double stationarity_residual = 0.0;
  double tol_stat = 0.0;
  bool converged = false;
  std::string stop_reason;
  bool objective_monotone = true;
  double wall_time = 0.0;

  /// Value of a metric; throws std::out_of_range if absent.
  double metric(const std::string& name) const;
};

/// Resolved eps for a spec at sample size n.
double resolve_epsilon(const ExperimentSpec& spec, Index n);

/// Every (n, replication) pair of spec.n_values x reps; grid index = position in n_values.
std::vector<ResultRow> run_recovery(const ExperimentSpec& spec);

enum class SweepAxis { n, rank, m, sigma };
SweepAxis parse_sweep_axis(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

struct SweepPoint {
  double x;
  double median;  ///< median over replications of the squared l2pi error
  double q25;
  double q75;
  int failures;   ///< rows with converged = false
};

struct SweepReport {
  SweepAxis axis;
  std::vector<SweepPoint> points;
  double slope = 0.0;  ///< OLS slope of log(median) against log(x)
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<ResultRow> rows;
};

/// Runs the spec over `grid` on the chosen axis (for axis n, an empty grid
/// means spec.n_values; other axes use spec.n_values.front() as n). The
/// bootstrap resamples replications within each grid point, `bootstrap`
/// times. Throws std::invalid_argument for fewer than 3 distinct positive
/// grid values.
SweepReport run_scaling_sweep(const ExperimentSpec& spec, SweepAxis axis, std::vector<double> grid = {},
                              int bootstrap = 200);

/// OLS slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

struct BernsteinRow {
  double t;          ///< deviation level of the mean
  double empirical;  ///< frequency of ||n^{-1} sum (X_i - EX)|| >= t
  double bound;      ///< bernstein_tail(n t, n, m, sigma_X, U_centered)
  double slack;      ///< 3 sqrt(bound (1 - bound) / reps) where bound <= 1, else 0
  bool violation;
};

struct BernsteinTable {
  Index n = 0;
  Index m = 0;
  int reps = 0;
  double sigma_X = 0.0;
  double U = 0.0;
  double max_deviation = 0.0;
  std::vector<BernsteinRow> rows;
  int violations = 0;
};

/// Requires a basis design. An empty t_grid gives 20 points from the 5%
/// quantile of the observed deviations to 1.5 times the largest.
BernsteinTable run_bernstein_suite(const DesignDistribution& dist, Index n, int reps, std::vector<double> t_grid,
                                   std::uint64_t seed);

struct PopulationRow {
  double epsilon;
  double l2_sq;           ///< ||rho^eps - rho||^2_{L2(Pi)}
  double sym_kl;          ///< K(rho^eps; rho)
  double slow_rhs;        ///< eps ||log rho||
  double aligned_lhs;     ///< l2_sq + (eps/2) sym_kl
  double aligned_rhs;     ///< (eps^2/4) a^2(log rho)
  double lowrank_ratio;   ///< l2_sq / approx-lowrank bound with C = 1
  double gibbs_ratio;     ///< l2_sq / approx-gibbs bound for H = -log rho
  double residual;
  double tol_stat;
  bool converged;
  bool objective_monotone;
};

struct PopulationTable {
  std::vector<PopulationRow> rows;
  double log_rho_norm = 0.0;
  double alignment = 0.0;
  bool slow_holds = true;     ///< l2_sq <= slow_rhs + slack everywhere
  bool aligned_holds = true;  ///< aligned_lhs <= aligned_rhs + slack everywhere
};

/// Solves the population problem for each eps in the grid. rho must be full rank.
PopulationTable run_population_props(const DesignDistribution& dist, const DensityMatrix& rho,
                                     const std::vector<double>& eps_grid, double slack = 1e-6,
                                     SolverConfig cfg = {});

/// Random truth for a spec and replication (paired across grid points).
DensityMatrix draw_truth(const ExperimentSpec& spec, int rep);

}  // namespace dmest
