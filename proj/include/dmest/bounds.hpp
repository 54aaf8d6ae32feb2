#pragma once

// Closed-form evaluators for the error bounds of the entropy-penalized
// estimator and for operator Bernstein tail bounds. Every unspecified
// numerical constant (C, D) and the oracle trade-off lambda are fields of
// RateContext defaulting to 1, so only the scaling of a bound is meaningful.
// Logarithms are natural except log_2 inside tau_n.

#include "dmest/hermitian.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dmest {

struct RateContext {
  Index m = 1;
  Index n = 1;
  double t = 1.0;          ///< confidence parameter: bounds hold with probability 1 - e^{-t}
  double sigma_xi = 0.0;   ///< noise standard deviation
  double c_xi = 0.0;       ///< noise bound (bounded noise) or psi_2-based constant
  double psi1_xi = 0.0;    ///< ||xi||_{psi_1}, used when psi1_noise is set
  bool psi1_noise = false; ///< replace c_xi terms by psi_1 expressions for unbounded noise

  double sigma_X = 0.0;
  double sigma_XX = 0.0;
  double U = 0.0;
  double E_norm_sq = 0.0;  ///< E ||X||^2
  double mean_norm = 0.0;  ///< ||E X||

  double C = 1.0;
  double D = 1.0;
  double lambda = 1.0;

  /// t + log(2m).
  double t_m() const;
  /// t + log(log_2(2n)).
  double tau_n() const;
  /// max(tau_n log n, t_m).
  double t_nm() const;
  /// Throws std::invalid_argument for m, n < 1, t <= 0 or nonpositive C, D, lambda.
  void validate() const;
};

struct BoundComponent {
  std::string name;
  double value;
};

/// value = additive + multiplier * max(components).
struct BoundReport {
  std::string name;
  double value = 0.0;
  double additive = 0.0;
  double multiplier = 1.0;
  std::vector<BoundComponent> components;
  std::vector<BoundComponent> inputs;

  double max_component() const;
};

/// One CSV line: name, value, additive, multiplier, then "component=value" fields.
std::string bound_report_csv(const BoundReport& report);

// Operator Bernstein bounds for i.i.d. centered X_j with ||E X^2|| <= sigma^2.

/// P{ ||X_1 + ... + X_n|| >= t } <= 2m exp(-t^2 / (2 sigma^2 n + 2 U t / 3)).
double bernstein_tail(double t, Index n, Index m, double sigma_X, double U);

/// Deviation level for the mean holding with probability 1 - e^{-t}:
/// 2 max(sigma sqrt(t_m / n), U t_m / n).
double bernstein_level(double t, Index n, Index m, double sigma_X, double U);

/// C max(sigma sqrt(t_m / n), U_a (log(U_a / sigma))^{1/alpha} t_m / n), with
/// U_a / sigma floored at e.
double bernstein_psi_level(double t, Index n, Index m, double sigma_X, double U_alpha, double alpha, double C = 1.0);

/// C max(sigma sqrt(log(2m)/n), sigma_tilde sqrt(t/n), U log(2m)/n, U t/n).
double bernstein_small_variance_level(double t, Index n, Index m, double sigma_X, double sigma_tilde, double U,
                                      double C = 1.0);

/// C max(sigma sqrt(log(2m)/n), sigma_tilde sqrt(t/n), U_1 log(U_1/sigma) log(2m)/n, U_1 t log(n)/n),
/// with U_1 / sigma floored at e.
double bernstein_small_variance_psi1_level(double t, Index n, Index m, double sigma_X, double sigma_tilde, double U1,
                                           double C = 1.0);

/// Regularization scales eps_{n,m}; the data-driven choice is D * eps_{n,m}.
///   "general"   (sigma_xi sigma_X v sigma_xi ||EX|| v sigma_XX) sqrt(t_m/n) v (c_xi U v U^2) t_m/n
///   "completion" (sigma_xi m^{-1/2} v m^{-1/2}) sqrt(t_m/n) v (c_xi v 1) t_m/n
///   "pauli"     (sigma_xi m^{-1/2} v m^{-1}) sqrt(t_m/n) v (c_xi m^{-1/2} v m^{-1}) t_m/n
///   "subgauss"  sigma_xi sqrt(m t_m/n) v c_xi sqrt(m) t_m/n
double epsilon_threshold(const RateContext& ctx, std::string_view flavor);
std::vector<std::string> epsilon_flavors();

/// Oracle-side quantities; which ones a bound needs depends on the bound.
struct OracleInfo {
  std::optional<double> epsilon;
  std::optional<double> approx_error_sq;  ///< ||S - rho||^2_{L2(Pi)} (or ||rho_H - rho||^2 for Gibbs bounds)
  std::optional<double> rank;             ///< r: rank(S), dim(L) or rank(rho)
  std::optional<double> a_log_S;          ///< alignment coefficient a(log S)
  std::optional<double> tail_norm;        ///< ||P_{L-perp} S P_{L-perp}||_1
  std::optional<double> log_S_op;         ///< ||log S||
  std::optional<double> log_S_hs;         ///< ||log S||_2
  std::optional<double> beta;             ///< beta(L)
  std::optional<double> lambda_L;         ///< Lambda(L)
  std::optional<double> rho_eps_l2;       ///< ||rho^eps - rho||_{L2(Pi)}
  std::optional<double> rho_eps_trace;    ///< ||rho^eps - rho||_1
  std::optional<double> delta_r;          ///< Gibbs tail delta_r(H)
  std::optional<double> gamma_r;          ///< ||H_{<=r}||_2^2
  std::optional<double> a_H_low;          ///< a(H_{<=r})
  std::optional<double> max_diag_moment;  ///< max_k E <X e_k, e_k>^2
};

/// Evaluates one of the error bounds; see bound_tags() for the list. Throws
/// std::invalid_argument naming the missing symbol and the bound when a
/// required field is absent.
BoundReport oracle_rhs(const RateContext& ctx, std::string_view tag, const OracleInfo& info);
std::vector<std::string> bound_tags();
/// One-line description of a bound tag.
std::string_view bound_description(std::string_view tag);

/// Constant-free and constant-C bounds on ||rho^eps - rho||^2_{L2(Pi)} for the
/// population solution:
///   "approx-slow"    (2 ||S - rho|| + sqrt(eps ||log S||))^2
///   "approx-aligned" (||S - rho|| + (eps/2) a(log S))^2; bounds the squared
///                    distance plus (eps/2) K(rho^eps; S)
///   "approx-lowrank" 2 ||S - rho||^2 + C eps^2 [Lambda^2 r log^2(1 + m/(eps ^ 1)) + E||X||^2]
///   "approx-gibbs"   2 ||rho_H - rho||^2 + 24 max_k E<X e_k, e_k>^2 delta_r^2 + a^2(H_{<=r}) eps^2
double approx_rhs(const RateContext& ctx, std::string_view prop, const OracleInfo& info);

}  // namespace dmest
