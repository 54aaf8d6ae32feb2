#pragma once

// Entropy-penalized least squares over density matrices, its known-design and
// population variants, and the nuclear-norm penalized baseline.

#include "dmest/designs.hpp"
#include "dmest/noise.hpp"
#include "dmest/states.hpp"

#include <string>
#include <vector>

namespace dmest {

struct SolverConfig {
  double epsilon = 0.0;
  int max_iter = 5000;
  double tol_obj = 1e-15;      ///< relative objective decrease treated as stagnation
  double tol_stat = -1.0;      ///< <= 0 selects 1e-6 * (1 + data scale)
  double step_init = 1.0;
  double backtrack_factor = 0.5;
  double eig_floor = kEigFloor;
  double step_max = 1e8;       ///< cap on the step after growth
  int stagnation_window = 200; ///< consecutive stagnant iterations before stopping

  /// Throws DomainError for invalid settings.
  void validate() const;
};

struct EstimateResult {
  DensityMatrix estimate = DensityMatrix::maximally_mixed(1);
  std::vector<double> objective_trace;  ///< value at S_0 then after every accepted step
  double stationarity_residual = kInfinity;
  double tol_stat = 0.0;                ///< tolerance actually used
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

/// f(S) = constant - 2 <b, s> + s^T Q s in hermitian_coordinates s of S,
/// the common form of every least-squares objective here.
struct QuadraticModel {
  Index dim = 0;
  RMatrix q;
  RVector b;
  double constant = 0.0;
  double data_scale = 0.0;  ///< RMS response, or ||rho||_{L2(Pi)} for the population problem

  double value(const RVector& s) const { return constant - 2.0 * b.dot(s) + s.dot(q * s); }
  /// Coordinates of the gradient 2 Q s - 2 b.
  RVector gradient(const RVector& s) const { return 2.0 * (q * s - b); }
};

/// n^{-1} sum (Y_j - tr(S X_j))^2.
QuadraticModel empirical_model(const Dataset& data);
/// ||S||^2_{L2(Pi)} - (2/n) sum Y_j tr(S X_j).
QuadraticModel known_design_model(const Dataset& data, const DesignDistribution& dist);
/// ||S - rho||^2_{L2(Pi)}.
QuadraticModel population_model(const DensityMatrix& rho, const DesignDistribution& dist);

/// n^{-1} sum (Y_j - tr(S X_j))^2 + eps tr(S log S), summed term by term.
double empirical_objective(const DensityMatrix& s, const Dataset& data, double epsilon);

/// ||S||^2_{L2(Pi)} - (2/n) sum Y_j tr(S X_j) + eps tr(S log S).
double population_objective(const DensityMatrix& s, const DesignDistribution& dist, const Dataset& data,
                            double epsilon);

/// (2/n) sum (tr(S X_j) - Y_j) X_j + eps (log S + I), log clamped at eig_floor.
HermitianMatrix gradient_empirical(const DensityMatrix& s, const Dataset& data, double epsilon,
                                   double eig_floor = kEigFloor);

/// Full objective and gradient of a model plus eps tr(S log S).
double model_objective(const QuadraticModel& model, const DensityMatrix& s, double epsilon);
HermitianMatrix model_gradient(const QuadraticModel& model, const DensityMatrix& s, double epsilon,
                               double eig_floor = kEigFloor);

/// Operator norm of the traceless part of grad: || grad - (tr grad / m) I ||.
double stationarity_residual(const HermitianMatrix& grad);

/// Frank-Wolfe gap <G, S> - lambda_min(G), the certificate used when eps = 0.
double frank_wolfe_gap(const DensityMatrix& s, const HermitianMatrix& grad);

/// Minimizes a model plus eps tr(S log S) over density matrices. eps > 0 runs
/// entropic mirror descent with the entropy handled in closed form; eps = 0
/// runs projected gradient. Throws std::runtime_error on a NaN objective.
EstimateResult solve_model(const QuadraticModel& model, const SolverConfig& cfg);

/// Empirical problem, or its known-design variant when `dist` is non-null.
EstimateResult solve_entropy_penalized(const Dataset& data, const DesignDistribution* dist, const SolverConfig& cfg);

/// argmin over density matrices of ||S - rho||^2_{L2(Pi)} + eps tr(S log S).
EstimateResult solve_population(const DensityMatrix& rho, const DesignDistribution& dist, double epsilon,
                                SolverConfig cfg = {});

struct NuclearResult {
  HermitianMatrix estimate;
  std::vector<double> objective_trace;
  double residual = kInfinity;  ///< Frobenius norm of the prox-gradient mapping
  double tol_stat = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// argmin over Hermitian S of n^{-1} sum (Y_j - tr(S X_j))^2 + eps ||S||_1 by
/// proximal gradient with step 1 / (2 max_j ||X_j||_2^2).
NuclearResult solve_nuclear_baseline(const Dataset& data, double epsilon_nuc, SolverConfig cfg = {});

/// Eigenvalues v of a Hermitian matrix projected onto the probability simplex.
RVector project_to_simplex(const RVector& v);

}  // namespace dmest
