#include "dmest/bounds.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace dmest {

namespace {

double max_of(std::initializer_list<double> xs) { return *std::max_element(xs.begin(), xs.end()); }

void check_positive(double x, const char* what) {
  if (!(x > 0.0)) throw std::invalid_argument(fmt::format("{} must be positive, got {}", what, x));
}

// log(x) with x floored at e, so the factor is at least 1.
double log_floor_e(double x) { return x > std::exp(1.0) ? std::log(x) : 1.0; }

// eps * min(log_norm, cap) with the convention 0 * inf = 0.
double slow_penalty(double eps, double log_norm, double cap) {
  if (eps == 0.0) return 0.0;
  return eps * std::min(log_norm, cap);
}

struct Builder {
  std::string_view tag;
  const OracleInfo& info;
  BoundReport report;

  double need(const std::optional<double>& v, const char* symbol) {
    if (!v) throw std::invalid_argument(fmt::format("bound '{}' requires {}", tag, symbol));
    report.inputs.push_back({symbol, *v});
    return *v;
  }
  void add(const char* name, double value) { report.components.push_back({name, value}); }
  BoundReport finish(double additive, double multiplier) {
    report.additive = additive;
    report.multiplier = multiplier;
    report.value = additive + multiplier * report.max_component();
    return std::move(report);
  }
};

// c_xi U (tau_n v t_m) / n, or its psi_1 replacement for unbounded noise.
void add_noise_bound_term(Builder& b, const RateContext& ctx) {
  const double n = static_cast<double>(ctx.n);
  if (!ctx.psi1_noise) {
    b.add("c_xi U (tau_n v t_m)/n", ctx.c_xi * ctx.U * std::max(ctx.tau_n(), ctx.t_m()) / n);
    return;
  }
  const double ratio = (ctx.psi1_xi / ctx.sigma_xi) * (ctx.U / ctx.sigma_X);
  b.add("psi1 U tau_n log n/n", ctx.psi1_xi * ctx.U * ctx.tau_n() * std::log(n) / n);
  b.add("psi1 U log(ratio) t_m/n", ctx.psi1_xi * ctx.U * log_floor_e(ratio) * ctx.t_m() / n);
}

// (c_xi U v U^2) t_m / n, or (psi1 U log(ratio) v U^2) t_m / n.
double bounded_second_order(const RateContext& ctx) {
  const double n = static_cast<double>(ctx.n);
  double noise = ctx.c_xi * ctx.U;
  if (ctx.psi1_noise) {
    const double ratio = (ctx.psi1_xi / ctx.sigma_xi) * (ctx.U / ctx.sigma_X);
    noise = ctx.psi1_xi * ctx.U * log_floor_e(ratio);
  }
  return std::max(noise, ctx.U * ctx.U) * ctx.t_m() / n;
}

double bounded_first_order(const RateContext& ctx) {
  const double n = static_cast<double>(ctx.n);
  return max_of({ctx.sigma_xi * ctx.sigma_X, ctx.sigma_xi * ctx.mean_norm, ctx.sigma_XX}) * std::sqrt(ctx.t_m() / n);
}

double log_gamma_bounded(const RateContext& ctx, double eps) {
  const double m = static_cast<double>(ctx.m);
  if (eps <= 0.0) return kInfinity;
  return std::log(std::max(m * std::sqrt(ctx.E_norm_sq) / std::sqrt(eps), m));
}

using Evaluator = std::function<BoundReport(const RateContext&, Builder&)>;

struct TagEntry {
  std::string_view description;
  Evaluator eval;
};

const std::map<std::string, TagEntry, std::less<>>& registry() {
  static const std::map<std::string, TagEntry, std::less<>> table = [] {
    std::map<std::string, TagEntry, std::less<>> t;

    // Subgaussian isotropic designs, Gaussian noise.
    t["isotropic-slow"] = {
        "slow rate for isotropic subgaussian designs, in terms of ||log rho||",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double log_rho = b.need(b.info.log_S_op, "||log rho||");
          b.add("eps (||log rho|| ^ log(m/eps))", slow_penalty(eps, log_rho, std::log(m / eps)));
          b.add("sigma_xi sqrt(m t_m/n)", c.sigma_xi * std::sqrt(m * c.t_m() / n));
          b.add("(sigma_xi v sqrt m) sqrt m (tau_n log n v t_m)/n",
                std::max(c.sigma_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish(0.0, c.C);
        }};
    t["isotropic-oracle"] = {
        "oracle inequality for isotropic subgaussian designs over an oracle S and subspace L",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double log_hs = b.need(b.info.log_S_hs, "||log S||_2");
          const double r = b.need(b.info.rank, "dim(L)");
          const double tail = b.need(b.info.tail_norm, "||P_perp S P_perp||_1");
          b.add("eps^2 ||log S||_2^2", eps == 0.0 ? 0.0 : eps * eps * log_hs * log_hs);
          b.add("sigma_xi^2 (m dim L + tau_n)/n", c.sigma_xi * c.sigma_xi * (m * r + c.tau_n()) / n);
          b.add("sigma_xi tail sqrt(m t_m/n)", c.sigma_xi * tail * std::sqrt(m * c.t_m() / n));
          b.add("(sigma_xi v sqrt m) sqrt m (tau_n log n v t_m)/n",
                std::max(c.sigma_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish(2.0 * approx, c.C);
        }};
    t["isotropic-lowrank"] = {
        "low-rank oracle inequality for isotropic subgaussian designs with eps = D sigma_xi sqrt(m t_m/n)",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double r = b.need(b.info.rank, "rank(S)");
          const double lg = std::log(m * n);
          b.add("sigma_xi^2 rank m t_m log^2(mn)/n", c.sigma_xi * c.sigma_xi * r * m * c.t_m() * lg * lg / n);
          b.add("m (tau_n log n v t_m)/n", m * c.t_nm() / n);
          return b.finish(2.0 * approx, c.C);
        }};
    t["isotropic-kl"] = {
        "Kullback-Leibler bound K(rho_hat; rho) for isotropic subgaussian designs",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          check_positive(eps, "epsilon");
          const double log_hs = b.need(b.info.log_S_hs, "||log rho||_2");
          const double r = b.need(b.info.rank, "dim(L)");
          const double tail = b.need(b.info.tail_norm, "||P_perp rho P_perp||_1");
          b.add("eps^2 ||log rho||_2^2", eps * eps * log_hs * log_hs);
          b.add("sigma_xi^2 (m dim L + tau_n)/n", c.sigma_xi * c.sigma_xi * (m * r + c.tau_n()) / n);
          b.add("sigma_xi tail sqrt(m t_m/n)", c.sigma_xi * tail * std::sqrt(m * c.t_m() / n));
          b.add("(sigma_xi v sqrt m) sqrt m (tau_n log n v t_m)/n",
                std::max(c.sigma_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish(0.0, c.C / eps);
        }};

    // Pauli designs, Gaussian noise.
    t["pauli-slow"] = {
        "slow rate for the Pauli design, in terms of ||log rho||",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double log_rho = b.need(b.info.log_S_op, "||log rho||");
          b.add("eps (||log rho|| ^ log(m/eps))", slow_penalty(eps, log_rho, std::log(m / eps)));
          b.add("(sigma_xi v m^{-1/2}) sqrt(t_m/(nm))",
                std::max(c.sigma_xi, 1.0 / std::sqrt(m)) * std::sqrt(c.t_m() / (n * m)));
          return b.finish(0.0, c.C);
        }};
    t["pauli-lowrank"] = {
        "low-rank oracle inequality for the Pauli design",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double r = b.need(b.info.rank, "rank(S)");
          const double lg = std::log(m * n);
          b.add("(sigma_xi^2 v 1/m) rank m t_m log^2(mn)/n",
                std::max(c.sigma_xi * c.sigma_xi, 1.0 / m) * r * m * c.t_m() * lg * lg / n);
          return b.finish(2.0 * approx, c.C);
        }};
    t["pauli-hellinger"] = {
        "squared Hellinger bound for the Pauli design",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double r = b.need(b.info.rank, "rank(rho)");
          const double lg = std::log(m * n);
          b.add("(sigma_xi v m^{-1/2}) rank sqrt(m t_m) log^2(mn)/sqrt n",
                std::max(c.sigma_xi, 1.0 / std::sqrt(m)) * r * std::sqrt(m * c.t_m()) * lg * lg / std::sqrt(n));
          return b.finish(0.0, c.C);
        }};

    // Bounded designs, bounded noise (or psi_1 noise when ctx.psi1_noise).
    t["bounded-slow"] = {
        "slow rate for bounded designs over an oracle S",
        [](const RateContext& c, Builder& b) {
          const double n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double log_s = b.need(b.info.log_S_op, "||log S||");
          b.add("eps (||log S|| ^ log Gamma)", slow_penalty(eps, log_s, log_gamma_bounded(c, eps)));
          b.add("||S - rho|| U sqrt(t_m/n)", std::sqrt(approx) * c.U * std::sqrt(c.t_m() / n));
          b.add("(sigma_xi sigma_X v sigma_xi ||EX|| v sigma_XX) sqrt(t_m/n)", bounded_first_order(c));
          b.add("(c_xi U v U^2) t_m/n", bounded_second_order(c));
          return b.finish(approx, c.C);
        }};
    t["bounded-slow-rho"] = {
        "slow rate for bounded designs, in terms of ||log rho||",
        [](const RateContext& c, Builder& b) {
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double log_rho = b.need(b.info.log_S_op, "||log rho||");
          b.add("eps (||log rho|| ^ log Gamma)", slow_penalty(eps, log_rho, log_gamma_bounded(c, eps)));
          b.add("(sigma_xi sigma_X v sigma_xi ||EX|| v sigma_XX) sqrt(t_m/n)", bounded_first_order(c));
          b.add("(c_xi U v U^2) t_m/n", bounded_second_order(c));
          return b.finish(0.0, c.C);
        }};
    t["bounded-oracle"] = {
        "oracle inequality for bounded designs with alignment and compression coefficients",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double a = b.need(b.info.a_log_S, "a(log S)");
          const double beta = b.need(b.info.beta, "beta(L)");
          const double r = b.need(b.info.rank, "dim(L)");
          const double tail = b.need(b.info.tail_norm, "||P_perp S P_perp||_1");
          b.add("a^2(log S) eps^2", eps == 0.0 ? 0.0 : a * a * eps * eps);
          b.add("sigma_xi^2 beta^2 (m r + tau_n)/n", c.sigma_xi * c.sigma_xi * beta * beta * (m * r + c.tau_n()) / n);
          b.add("sigma_xi (sigma_X v ||EX||) tail sqrt(t_m/n)",
                c.sigma_xi * std::max(c.sigma_X, c.mean_norm) * tail * std::sqrt(c.t_m() / n));
          add_noise_bound_term(b, c);
          b.add("U^2 t_m/n", c.U * c.U * c.t_m() / n);
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};
    t["bounded-random-error"] = {
        "random error ||rho_hat - rho^eps||^2 for bounded designs",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double beta = b.need(b.info.beta, "beta(L)");
          const double r = b.need(b.info.rank, "dim(L)");
          const double tail = b.need(b.info.tail_norm, "||P_perp rho^eps P_perp||_1");
          const double d_l2 = b.need(b.info.rho_eps_l2, "||rho^eps - rho||_{L2}");
          const double d_tr = b.need(b.info.rho_eps_trace, "||rho^eps - rho||_1");
          b.add("sigma_xi^2 beta^2 (m r + tau_n)/n", c.sigma_xi * c.sigma_xi * beta * beta * (m * r + c.tau_n()) / n);
          b.add("sigma_xi (sigma_X v ||EX||) tail sqrt(t_m/n)",
                c.sigma_xi * std::max(c.sigma_X, c.mean_norm) * tail * std::sqrt(c.t_m() / n));
          b.add("U ||rho^eps - rho||_{L2} sqrt(t_m/n)", c.U * d_l2 * std::sqrt(c.t_m() / n));
          b.add("U^2 ||rho^eps - rho||_1 t_m/n", c.U * c.U * d_tr * c.t_m() / n);
          add_noise_bound_term(b, c);
          return b.finish(0.0, c.C);
        }};
    t["completion-lowrank"] = {
        "low-rank oracle inequality for uniform matrix completion",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double r = b.need(b.info.rank, "rank(S)");
          const double lg = std::log(m * n);
          const double s2 = c.sigma_xi * c.sigma_xi, c2 = c.c_xi * c.c_xi, tm = c.t_m();
          b.add("D^2 rank-term log^2(mn)",
                c.D * c.D *
                    std::max(std::max(s2, 1.0) * r * m * tm / n, std::max(c2, 1.0) * r * m * m * tm * tm / (n * n)) *
                    lg * lg);
          b.add("sigma_xi^2 tau_n/n", s2 * c.tau_n() / n);
          b.add("c_xi (tau_n v t_m)/n", c.c_xi * std::max(c.tau_n(), tm) / n);
          b.add("t_m/n", tm / n);
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};
    t["completion-gibbs"] = {
        "Gibbs-approximation oracle inequality for uniform matrix completion",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||rho_H - rho||^2");
          const double r = b.need(b.info.rank, "r");
          const double delta = b.need(b.info.delta_r, "delta_r(H)");
          const double gamma = b.need(b.info.gamma_r, "Gamma_r(H)");
          const double s2 = c.sigma_xi * c.sigma_xi, c2 = c.c_xi * c.c_xi, tm = c.t_m();
          b.add("delta_r^2/m^2", delta * delta / (m * m));
          b.add("D^2 Gamma_r-term", c.D * c.D *
                                        std::max(std::max(s2, 1.0) * gamma * m * tm / n,
                                                 std::max(c2, 1.0) * gamma * m * m * tm * tm / (n * n)));
          b.add("sigma_xi^2 (m r + tau_n)/n", s2 * (m * r + c.tau_n()) / n);
          b.add("c_xi (tau_n v t_m)/n", c.c_xi * std::max(c.tau_n(), tm) / n);
          b.add("t_m/n", tm / n);
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};
    t["pauli-design-lowrank"] = {
        "low-rank oracle inequality for the Pauli design with bounded noise",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double r = b.need(b.info.rank, "rank(S)");
          const double lg = std::log(m * n);
          const double s2 = c.sigma_xi * c.sigma_xi, c2 = c.c_xi * c.c_xi, tm = c.t_m();
          b.add("D^2 rank-term log^2(mn)",
                c.D * c.D *
                    std::max(std::max(s2, 1.0 / m) * r * m * tm / n, std::max(c2, 1.0 / m) * r * m * tm * tm / (n * n)) *
                    lg * lg);
          b.add("sigma_xi^2 tau_n/n", s2 * c.tau_n() / n);
          b.add("c_xi m^{-1/2} (tau_n v t_m)/n", c.c_xi / std::sqrt(m) * std::max(c.tau_n(), tm) / n);
          b.add("t_m/(mn)", tm / (m * n));
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};
    t["pauli-design-gibbs"] = {
        "Gibbs-approximation oracle inequality for the Pauli design with bounded noise",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||rho_H - rho||^2");
          const double r = b.need(b.info.rank, "r");
          const double delta = b.need(b.info.delta_r, "delta_r(H)");
          const double gamma = b.need(b.info.gamma_r, "Gamma_r(H)");
          const double s2 = c.sigma_xi * c.sigma_xi, c2 = c.c_xi * c.c_xi, tm = c.t_m();
          b.add("delta_r^2/m^2", delta * delta / (m * m));
          b.add("D^2 Gamma_r-term", c.D * c.D *
                                        std::max(std::max(s2, 1.0 / m) * gamma * m * tm / n,
                                                 std::max(c2, 1.0 / m) * gamma * m * m * tm * tm / (n * n)));
          b.add("sigma_xi^2 (m r + tau_n)/n", s2 * (m * r + c.tau_n()) / n);
          b.add("c_xi m^{-1/2} (tau_n v t_m)/n", c.c_xi / std::sqrt(m) * std::max(c.tau_n(), tm) / n);
          b.add("t_m/(mn)", tm / (m * n));
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};

    // Subgaussian isotropic designs, subgaussian noise with c_xi = psi2 log(psi2/sigma).
    t["subgauss-slow"] = {
        "slow rate for subgaussian designs and noise over an oracle S",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double log_s = b.need(b.info.log_S_op, "||log S||");
          b.add("eps (||log S|| ^ log(m/eps))", slow_penalty(eps, log_s, std::log(m / eps)));
          b.add("sigma_xi sqrt(m t_m/n)", c.sigma_xi * std::sqrt(m * c.t_m() / n));
          b.add("m t_m/(n lambda)", m * c.t_m() / (n * c.lambda));
          b.add("(c_xi v sqrt m) sqrt m t_{n,m}/n", std::max(c.c_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish((1.0 + c.lambda) * approx, c.C);
        }};
    t["subgauss-slow-rho"] = {
        "slow rate for subgaussian designs and noise, in terms of ||log rho||",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double log_rho = b.need(b.info.log_S_op, "||log rho||");
          b.add("eps (||log rho|| ^ log(m/eps))", slow_penalty(eps, log_rho, std::log(m / eps)));
          b.add("sigma_xi sqrt(m t_m/n)", c.sigma_xi * std::sqrt(m * c.t_m() / n));
          b.add("(c_xi v sqrt m) sqrt m t_{n,m}/n", std::max(c.c_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish(0.0, c.C);
        }};
    t["subgauss-oracle"] = {
        "oracle inequality for subgaussian designs and noise with alignment and compression coefficients",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double eps = b.need(b.info.epsilon, "epsilon");
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double a = b.need(b.info.a_log_S, "a(log S)");
          const double beta = b.need(b.info.beta, "beta(L)");
          const double r = b.need(b.info.rank, "dim(L)");
          const double tail = b.need(b.info.tail_norm, "||P_perp S P_perp||_1");
          b.add("a^2(log S) eps^2", eps == 0.0 ? 0.0 : a * a * eps * eps);
          b.add("sigma_xi^2 beta^2 (m r + tau_n)/n", c.sigma_xi * c.sigma_xi * beta * beta * (m * r + c.tau_n()) / n);
          b.add("sigma_xi tail sqrt(m t_m/n)", c.sigma_xi * tail * std::sqrt(m * c.t_m() / n));
          b.add("(c_xi v sqrt m) sqrt m t_{n,m}/n", std::max(c.c_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};
    t["subgauss-random-error"] = {
        "random error ||rho_hat - rho^eps||^2 for subgaussian designs and noise",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double beta = b.need(b.info.beta, "beta(L)");
          const double r = b.need(b.info.rank, "dim(L)");
          const double tail = b.need(b.info.tail_norm, "||P_perp rho^eps P_perp||_1");
          const double d_l2 = b.need(b.info.rho_eps_l2, "||rho^eps - rho||_{L2}");
          b.add("sigma_xi^2 beta^2 (m r + tau_n)/n", c.sigma_xi * c.sigma_xi * beta * beta * (m * r + c.tau_n()) / n);
          b.add("sigma_xi tail sqrt(m t_m/n)", c.sigma_xi * tail * std::sqrt(m * c.t_m() / n));
          b.add("||rho^eps - rho||_{L2} sqrt(m t_m/n)", d_l2 * std::sqrt(m * c.t_m() / n));
          b.add("(c_xi v sqrt m) sqrt m t_{n,m}/n", std::max(c.c_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish(0.0, c.C);
        }};
    t["subgauss-lowrank"] = {
        "low-rank oracle inequality for subgaussian designs and noise",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||S - rho||^2");
          const double r = b.need(b.info.rank, "rank(S)");
          const double lg = std::log(m * n);
          const double s2 = c.sigma_xi * c.sigma_xi, c2 = c.c_xi * c.c_xi, tm = c.t_m();
          b.add("D^2 rank-term log^2(mn)",
                c.D * c.D * std::max(s2 * r * m * tm / n, c2 * r * m * tm * tm / (n * n)) * lg * lg);
          b.add("sigma_xi^2 tau_n/n", s2 * c.tau_n() / n);
          b.add("(c_xi v sqrt m) sqrt m t_{n,m}/n", std::max(c.c_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};
    t["subgauss-gibbs"] = {
        "Gibbs-approximation oracle inequality for subgaussian designs and noise",
        [](const RateContext& c, Builder& b) {
          const double m = c.m, n = c.n;
          const double approx = b.need(b.info.approx_error_sq, "||rho_H - rho||^2");
          const double r = b.need(b.info.rank, "r");
          const double delta = b.need(b.info.delta_r, "delta_r(H)");
          const double gamma = b.need(b.info.gamma_r, "Gamma_r(H)");
          const double s2 = c.sigma_xi * c.sigma_xi, c2 = c.c_xi * c.c_xi, tm = c.t_m();
          b.add("delta_r^2", delta * delta);
          b.add("D^2 Gamma_r-term",
                c.D * c.D * std::max(s2 * gamma * m * tm / n, c2 * gamma * m * tm * tm / (n * n)));
          b.add("sigma_xi^2 (m r + tau_n)/n", s2 * (m * r + c.tau_n()) / n);
          b.add("(c_xi v sqrt m) sqrt m t_{n,m}/n", std::max(c.c_xi, std::sqrt(m)) * std::sqrt(m) * c.t_nm() / n);
          return b.finish((1.0 + c.lambda) * approx, c.C / c.lambda);
        }};
    return t;
  }();
  return table;
}

}  // namespace

double RateContext::t_m() const { return t + std::log(2.0 * static_cast<double>(m)); }

double RateContext::tau_n() const { return t + std::log(std::log2(2.0 * static_cast<double>(n))); }

double RateContext::t_nm() const { return std::max(tau_n() * std::log(static_cast<double>(n)), t_m()); }

void RateContext::validate() const {
  if (m < 1) throw std::invalid_argument(fmt::format("m must be >= 1, got {}", m));
  if (n < 1) throw std::invalid_argument(fmt::format("n must be >= 1, got {}", n));
  check_positive(t, "t");
  check_positive(C, "C");
  check_positive(D, "D");
  check_positive(lambda, "lambda");
  if (sigma_xi < 0 || c_xi < 0 || psi1_xi < 0) throw std::invalid_argument("noise constants must be nonnegative");
  if (psi1_noise) {
    check_positive(sigma_xi, "sigma_xi (psi_1 noise)");
    check_positive(sigma_X, "sigma_X (psi_1 noise)");
  }
}

double BoundReport::max_component() const {
  double best = 0.0;
  for (const auto& c : components) best = std::max(best, c.value);
  return best;
}

std::string bound_report_csv(const BoundReport& report) {
  std::string out = fmt::format("{},{:.17g},{:.17g},{:.17g}", report.name, report.value, report.additive,
                                report.multiplier);
  for (const auto& c : report.components) out += fmt::format(",\"{}={:.17g}\"", c.name, c.value);
  return out;
}

double bernstein_tail(double t, Index n, Index m, double sigma_X, double U) {
  if (t < 0) throw std::invalid_argument("t must be nonnegative");
  const double denom = 2.0 * sigma_X * sigma_X * static_cast<double>(n) + 2.0 * U * t / 3.0;
  if (denom == 0.0) return t == 0.0 ? 2.0 * static_cast<double>(m) : 0.0;
  return 2.0 * static_cast<double>(m) * std::exp(-t * t / denom);
}

double bernstein_level(double t, Index n, Index m, double sigma_X, double U) {
  const double tm = t + std::log(2.0 * static_cast<double>(m));
  const double nn = static_cast<double>(n);
  return 2.0 * std::max(sigma_X * std::sqrt(tm / nn), U * tm / nn);
}

double bernstein_psi_level(double t, Index n, Index m, double sigma_X, double U_alpha, double alpha, double C) {
  check_positive(alpha, "alpha");
  const double tm = t + std::log(2.0 * static_cast<double>(m));
  const double nn = static_cast<double>(n);
  const double ratio = sigma_X > 0 ? U_alpha / sigma_X : kInfinity;
  return C * std::max(sigma_X * std::sqrt(tm / nn), U_alpha * std::pow(log_floor_e(ratio), 1.0 / alpha) * tm / nn);
}

double bernstein_small_variance_level(double t, Index n, Index m, double sigma_X, double sigma_tilde, double U,
                                      double C) {
  const double nn = static_cast<double>(n);
  const double l2m = std::log(2.0 * static_cast<double>(m));
  return C * max_of({sigma_X * std::sqrt(l2m / nn), sigma_tilde * std::sqrt(t / nn), U * l2m / nn, U * t / nn});
}

double bernstein_small_variance_psi1_level(double t, Index n, Index m, double sigma_X, double sigma_tilde, double U1,
                                           double C) {
  const double nn = static_cast<double>(n);
  const double l2m = std::log(2.0 * static_cast<double>(m));
  const double ratio = sigma_X > 0 ? U1 / sigma_X : kInfinity;
  return C * max_of({sigma_X * std::sqrt(l2m / nn), sigma_tilde * std::sqrt(t / nn),
                     U1 * log_floor_e(ratio) * l2m / nn, U1 * t * std::log(nn) / nn});
}

double epsilon_threshold(const RateContext& ctx, std::string_view flavor) {
  ctx.validate();
  const double m = static_cast<double>(ctx.m), n = static_cast<double>(ctx.n);
  const double tm = ctx.t_m(), s = ctx.sigma_xi, c = ctx.c_xi;
  const double rm = std::sqrt(m);
  if (flavor == "general") return std::max(bounded_first_order(ctx), bounded_second_order(ctx));
  if (flavor == "completion") return std::max(std::max(s / rm, 1.0 / rm) * std::sqrt(tm / n), std::max(c, 1.0) * tm / n);
  if (flavor == "pauli")
    return std::max(std::max(s / rm, 1.0 / m) * std::sqrt(tm / n), std::max(c / rm, 1.0 / m) * tm / n);
  if (flavor == "subgauss") return std::max(s * std::sqrt(m * tm / n), c * rm * tm / n);
  throw std::invalid_argument(fmt::format("unknown epsilon flavor '{}'", flavor));
}

std::vector<std::string> epsilon_flavors() { return {"general", "completion", "pauli", "subgauss"}; }

BoundReport oracle_rhs(const RateContext& ctx, std::string_view tag, const OracleInfo& info) {
  ctx.validate();
  const auto& table = registry();
  const auto it = table.find(tag);
  if (it == table.end()) throw std::invalid_argument(fmt::format("unknown bound '{}'", tag));
  Builder b{tag, info, {}};
  b.report.name = std::string(tag);
  return it->second.eval(ctx, b);
}

std::vector<std::string> bound_tags() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::string_view bound_description(std::string_view tag) {
  const auto& table = registry();
  const auto it = table.find(tag);
  if (it == table.end()) throw std::invalid_argument(fmt::format("unknown bound '{}'", tag));
  return it->second.description;
}

double approx_rhs(const RateContext& ctx, std::string_view prop, const OracleInfo& info) {
  Builder b{prop, info, {}};
  const double m = static_cast<double>(ctx.m);
  if (prop == "approx-slow") {
    const double eps = b.need(info.epsilon, "epsilon");
    const double d = std::sqrt(b.need(info.approx_error_sq, "||S - rho||^2"));
    const double log_s = b.need(info.log_S_op, "||log S||");
    const double root = 2.0 * d + (eps == 0.0 ? 0.0 : std::sqrt(eps * log_s));
    return root * root;
  }
  if (prop == "approx-aligned") {
    const double eps = b.need(info.epsilon, "epsilon");
    const double d = std::sqrt(b.need(info.approx_error_sq, "||S - rho||^2"));
    const double a = b.need(info.a_log_S, "a(log S)");
    const double root = d + (eps == 0.0 ? 0.0 : 0.5 * eps * a);
    return root * root;
  }
  if (prop == "approx-lowrank") {
    const double eps = b.need(info.epsilon, "epsilon");
    const double approx = b.need(info.approx_error_sq, "||S - rho||^2");
    const double lam = b.need(info.lambda_L, "Lambda(L)");
    const double r = b.need(info.rank, "rank(S)");
    if (eps == 0.0) return 2.0 * approx;
    const double lg = std::log(1.0 + m / std::min(eps, 1.0));
    return 2.0 * approx + ctx.C * eps * eps * (lam * lam * r * lg * lg + ctx.E_norm_sq);
  }
  if (prop == "approx-gibbs") {
    const double eps = b.need(info.epsilon, "epsilon");
    const double approx = b.need(info.approx_error_sq, "||rho_H - rho||^2");
    const double diag = b.need(info.max_diag_moment, "max_k E<X e_k, e_k>^2");
    const double delta = b.need(info.delta_r, "delta_r(H)");
    const double a = b.need(info.a_H_low, "a(H_{<=r})");
    return 2.0 * approx + 24.0 * diag * delta * delta + (eps == 0.0 ? 0.0 : a * a * eps * eps);
  }
  throw std::invalid_argument(fmt::format("unknown approximation bound '{}'", prop));
}

}  // namespace dmest
