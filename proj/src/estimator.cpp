#include "dmest/estimator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmest {

namespace {

/// Iterate kept in spectral form so that log S is exact even when some
/// eigenvalues underflow.
struct SpectralIterate {
  CMatrix vectors;
  RVector log_p;  ///< log eigenvalues (may be very negative); unused for eps = 0
  RVector p;
  RVector coords;
  double quad = 0.0;     ///< quadratic part of the objective
  double entropy = 0.0;  ///< tr S log S
};

double safe_entropy(const RVector& p, const RVector& log_p) {
  double acc = 0.0;
  for (Index k = 0; k < p.size(); ++k)
    if (p(k) > 0.0) acc += p(k) * log_p(k);
  return acc;
}

HermitianMatrix assemble(const CMatrix& vectors, const RVector& values) { return HermitianMatrix::from_spectrum(values, vectors); }

SpectralIterate make_iterate(const QuadraticModel& model, CMatrix vectors, RVector log_p, RVector p) {
  SpectralIterate it;
  it.vectors = std::move(vectors);
  it.log_p = std::move(log_p);
  it.p = std::move(p);
  it.coords = hermitian_coordinates(assemble(it.vectors, it.p));
  it.quad = model.value(it.coords);
  it.entropy = safe_entropy(it.p, it.log_p);
  return it;
}

/// Normalized exponential of a Hermitian matrix given its spectrum.
SpectralIterate softmax_iterate(const QuadraticModel& model, const HermitianMatrix& log_unnormalized) {
  const Spectrum sp = eig_hermitian(log_unnormalized);
  const double top = sp.eigenvalues.maxCoeff();
  const double lse = top + std::log((sp.eigenvalues.array() - top).exp().sum());
  RVector log_p = sp.eigenvalues.array() - lse;
  RVector p = log_p.array().exp();
  p /= p.sum();
  return make_iterate(model, sp.eigenvectors, std::move(log_p), std::move(p));
}

void check_finite(double f, int iteration) {
  if (std::isnan(f)) throw std::runtime_error(fmt::format("solver: objective is NaN at iteration {}", iteration));
}

double resolve_tol(const SolverConfig& cfg, const QuadraticModel& model) {
  return cfg.tol_stat > 0.0 ? cfg.tol_stat : 1e-6 * (1.0 + model.data_scale);
}

struct StopTracker {
  const SolverConfig& cfg;
  int stagnant = 0;
  /// True when the stagnation window is exhausted.
  bool record(double before, double after) {
    const double drop = before - after;
    if (drop <= cfg.tol_obj * std::max(std::abs(before), 1e-300)) {
      ++stagnant;
    } else {
      stagnant = 0;
    }
    return stagnant >= cfg.stagnation_window;
  }
};

EstimateResult solve_mirror(const QuadraticModel& model, const SolverConfig& cfg) {
  const Index m = model.dim;
  const double eps = cfg.epsilon;
  const double tol = resolve_tol(cfg, model);
  SpectralIterate cur = make_iterate(model, CMatrix::Identity(m, m), RVector::Constant(m, -std::log(double(m))),
                                     RVector::Constant(m, 1.0 / m));
  EstimateResult res;
  res.tol_stat = tol;
  res.objective_trace.push_back(cur.quad + eps * cur.entropy);
  StopTracker stop{cfg};
  double step = cfg.step_init;
  double residual = kInfinity;

  for (int iter = 0;; ++iter) {
    const HermitianMatrix grad_q = from_hermitian_coordinates(model.gradient(cur.coords), m);
    const HermitianMatrix log_s = assemble(cur.vectors, cur.log_p);
    residual = stationarity_residual(grad_q + eps * log_s);
    if (residual <= tol) {
      res.stop_reason = "stationary";
      break;
    }
    if (iter >= cfg.max_iter) {
      res.stop_reason = "max_iter";
      break;
    }
    const double f_cur = cur.quad + eps * cur.entropy;
    const double grad_q_dot_s = hs_inner(grad_q, assemble(cur.vectors, cur.p));
    const double slack = 1e-13 * std::max(1.0, std::abs(cur.quad));
    bool accepted = false;
    SpectralIterate next;
    for (int bt = 0; bt < 80; ++bt) {
      // argmin <G, S> + eps tr S log S + KL(S || S_t) / step over density matrices.
      next = softmax_iterate(model, (log_s - step * grad_q) / (1.0 + step * eps));
      check_finite(next.quad, iter);
      const double f_next = next.quad + eps * next.entropy;
      const HermitianMatrix s_next = assemble(next.vectors, next.p);
      const double kl = next.entropy - hs_inner(s_next, log_s);
      const double linear = hs_inner(grad_q, s_next) - grad_q_dot_s;
      if (next.quad <= cur.quad + linear + kl / step + slack && f_next <= f_cur + slack) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      res.stop_reason = "line_search";
      break;
    }
    cur = std::move(next);
    ++res.iterations;
    const double f_next = cur.quad + eps * cur.entropy;
    res.objective_trace.push_back(f_next);
    if (stop.record(f_cur, f_next)) {
      const HermitianMatrix g = from_hermitian_coordinates(model.gradient(cur.coords), m) +
                                eps * assemble(cur.vectors, cur.log_p);
      residual = stationarity_residual(g);
      res.stop_reason = "stagnation";
      break;
    }
    step = std::min(2.0 * step, cfg.step_max);
  }
  res.stationarity_residual = residual;
  res.converged = residual <= tol;
  res.estimate = DensityMatrix::from_probabilities(cur.p, cur.vectors);
  return res;
}

EstimateResult solve_projected(const QuadraticModel& model, const SolverConfig& cfg) {
  const Index m = model.dim;
  const double tol = resolve_tol(cfg, model);
  RVector p = RVector::Constant(m, 1.0 / m);
  CMatrix vecs = CMatrix::Identity(m, m);
  RVector coords = hermitian_coordinates(assemble(vecs, p));
  double f = model.value(coords);
  EstimateResult res;
  res.tol_stat = tol;
  res.objective_trace.push_back(f);
  StopTracker stop{cfg};
  double step = cfg.step_init;
  double residual = kInfinity;

  for (int iter = 0;; ++iter) {
    const RVector g = model.gradient(coords);
    const HermitianMatrix grad = from_hermitian_coordinates(g, m);
    residual = frank_wolfe_gap(DensityMatrix::from_probabilities(p, vecs), grad);
    if (residual <= tol) {
      res.stop_reason = "stationary";
      break;
    }
    if (iter >= cfg.max_iter) {
      res.stop_reason = "max_iter";
      break;
    }
    const HermitianMatrix s = assemble(vecs, p);
    const double slack = 1e-13 * std::max(1.0, std::abs(f));
    bool accepted = false;
    RVector p_next, c_next;
    CMatrix v_next;
    double f_next = f;
    for (int bt = 0; bt < 80; ++bt) {
      const Spectrum sp = eig_hermitian(s - step * grad);
      p_next = project_to_simplex(sp.eigenvalues);
      v_next = sp.eigenvectors;
      c_next = hermitian_coordinates(assemble(v_next, p_next));
      f_next = model.value(c_next);
      check_finite(f_next, iter);
      const RVector d = c_next - coords;
      if (f_next <= f + g.dot(d) + d.squaredNorm() / (2.0 * step) + slack && f_next <= f) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) {
      res.stop_reason = "line_search";
      break;
    }
    const double f_prev = f;
    p = std::move(p_next);
    vecs = std::move(v_next);
    coords = std::move(c_next);
    f = f_next;
    ++res.iterations;
    res.objective_trace.push_back(f);
    if (stop.record(f_prev, f)) {
      residual = frank_wolfe_gap(DensityMatrix::from_probabilities(p, vecs), from_hermitian_coordinates(model.gradient(coords), m));
      res.stop_reason = "stagnation";
      break;
    }
    step = std::min(2.0 * step, cfg.step_max);
  }
  res.stationarity_residual = residual;
  res.converged = residual <= tol;
  res.estimate = DensityMatrix::from_probabilities(p, vecs);
  return res;
}

RMatrix design_coordinates(const Dataset& data) {
  data.validate();
  const Index n = data.size(), m = data.dim();
  RMatrix x(n, m * m);
  for (Index j = 0; j < n; ++j) x.row(j) = hermitian_coordinates(data.designs[j]).transpose();
  return x;
}

RVector response_vector(const Dataset& data) { return Eigen::Map<const RVector>(data.responses.data(), data.size()); }

}  // namespace

void SolverConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw DomainError(fmt::format("SolverConfig: epsilon must be finite and >= 0, got {}", epsilon));
  if (max_iter < 0) throw DomainError("SolverConfig: max_iter must be >= 0");
  if (!(tol_obj > 0.0)) throw DomainError("SolverConfig: tol_obj must be > 0");
  if (!(step_init > 0.0) || !(step_max >= step_init)) throw DomainError("SolverConfig: need 0 < step_init <= step_max");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw DomainError("SolverConfig: backtrack_factor must lie in (0, 1)");
  if (!(eig_floor > 0.0)) throw DomainError("SolverConfig: eig_floor must be > 0");
  if (stagnation_window < 1) throw DomainError("SolverConfig: stagnation_window must be >= 1");
}

QuadraticModel empirical_model(const Dataset& data) {
  const RMatrix x = design_coordinates(data);
  const RVector y = response_vector(data);
  const double n = static_cast<double>(data.size());
  QuadraticModel model;
  model.dim = data.dim();
  model.q = RMatrix::Zero(x.cols(), x.cols());
  model.q.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / n);
  model.q = model.q.selfadjointView<Eigen::Lower>();
  model.b = x.transpose() * y / n;
  model.constant = y.squaredNorm() / n;
  model.data_scale = std::sqrt(model.constant);
  return model;
}

QuadraticModel known_design_model(const Dataset& data, const DesignDistribution& dist) {
  if (data.dim() != dist.dim()) throw DimensionError("known_design_model: dimension mismatch");
  const RMatrix x = design_coordinates(data);
  const RVector y = response_vector(data);
  const double n = static_cast<double>(data.size());
  QuadraticModel model;
  model.dim = data.dim();
  model.q = gram_matrix(dist);
  model.b = x.transpose() * y / n;
  model.constant = 0.0;
  model.data_scale = std::sqrt(y.squaredNorm() / n);
  return model;
}

QuadraticModel population_model(const DensityMatrix& rho, const DesignDistribution& dist) {
  if (rho.dim() != dist.dim()) throw DimensionError("population_model: dimension mismatch");
  QuadraticModel model;
  model.dim = rho.dim();
  model.q = gram_matrix(dist);
  const RVector r = hermitian_coordinates(rho.matrix());
  model.b = model.q * r;
  model.constant = r.dot(model.b);
  model.data_scale = std::sqrt(std::max(model.constant, 0.0));
  return model;
}

double empirical_objective(const DensityMatrix& s, const Dataset& data, double epsilon) {
  data.validate();
  require_same_dim(s.matrix(), data.designs.front(), "empirical_objective");
  double acc = 0.0;
  for (Index j = 0; j < data.size(); ++j) {
    const double r = data.responses[j] - hs_inner(s.matrix(), data.designs[j]);
    acc += r * r;
  }
  return acc / static_cast<double>(data.size()) + epsilon * entropy_penalty(s);
}

double population_objective(const DensityMatrix& s, const DesignDistribution& dist, const Dataset& data,
                            double epsilon) {
  data.validate();
  require_same_dim(s.matrix(), data.designs.front(), "population_objective");
  double lin = 0.0;
  for (Index j = 0; j < data.size(); ++j) lin += data.responses[j] * hs_inner(s.matrix(), data.designs[j]);
  const double l2 = l2_pi_norm(dist, s.matrix());
  return l2 * l2 - 2.0 * lin / static_cast<double>(data.size()) + epsilon * entropy_penalty(s);
}

HermitianMatrix gradient_empirical(const DensityMatrix& s, const Dataset& data, double epsilon, double eig_floor) {
  data.validate();
  require_same_dim(s.matrix(), data.designs.front(), "gradient_empirical");
  const Index m = s.dim();
  HermitianMatrix g(m);
  const double scale = 2.0 / static_cast<double>(data.size());
  for (Index j = 0; j < data.size(); ++j)
    g += data.designs[j] * (scale * (hs_inner(s.matrix(), data.designs[j]) - data.responses[j]));
  if (epsilon > 0.0) g += epsilon * matrix_func(s.matrix(), MatrixFunction::log, eig_floor).shifted(1.0);
  return g;
}

double model_objective(const QuadraticModel& model, const DensityMatrix& s, double epsilon) {
  return model.value(hermitian_coordinates(s.matrix())) + epsilon * entropy_penalty(s);
}

HermitianMatrix model_gradient(const QuadraticModel& model, const DensityMatrix& s, double epsilon, double eig_floor) {
  HermitianMatrix g = from_hermitian_coordinates(model.gradient(hermitian_coordinates(s.matrix())), model.dim);
  if (epsilon > 0.0) g += epsilon * matrix_func(s.matrix(), MatrixFunction::log, eig_floor).shifted(1.0);
  return g;
}

double stationarity_residual(const HermitianMatrix& grad) {
  return operator_norm(grad.shifted(-grad.trace() / static_cast<double>(grad.dim())));
}

double frank_wolfe_gap(const DensityMatrix& s, const HermitianMatrix& grad) {
  const double lmin = eig_hermitian(grad).eigenvalues.minCoeff();
  return std::max(hs_inner(grad, s.matrix()) - lmin, 0.0);
}

EstimateResult solve_model(const QuadraticModel& model, const SolverConfig& cfg) {
  cfg.validate();
  if (model.dim < 1 || model.q.rows() != model.dim * model.dim)
    throw DimensionError("solve_model: model dimensions are inconsistent");
  return cfg.epsilon > 0.0 ? solve_mirror(model, cfg) : solve_projected(model, cfg);
}

EstimateResult solve_entropy_penalized(const Dataset& data, const DesignDistribution* dist, const SolverConfig& cfg) {
  return solve_model(dist ? known_design_model(data, *dist) : empirical_model(data), cfg);
}

EstimateResult solve_population(const DensityMatrix& rho, const DesignDistribution& dist, double epsilon,
                                SolverConfig cfg) {
  cfg.epsilon = epsilon;
  return solve_model(population_model(rho, dist), cfg);
}

NuclearResult solve_nuclear_baseline(const Dataset& data, double epsilon_nuc, SolverConfig cfg) {
  cfg.epsilon = epsilon_nuc;
  cfg.validate();
  const QuadraticModel model = empirical_model(data);
  const Index m = model.dim;
  double lip = 0.0;
  for (const auto& x : data.designs) lip = std::max(lip, x.mat().squaredNorm());
  lip *= 2.0;
  const double step = 1.0 / lip;
  const double tol = resolve_tol(cfg, model);

  NuclearResult res{HermitianMatrix(m), {}, kInfinity, tol, 0, false};
  RVector s = RVector::Zero(m * m);
  auto objective = [&](const RVector& c) {
    return model.value(c) + epsilon_nuc * nuclear_norm(from_hermitian_coordinates(c, m));
  };
  double f = objective(s);
  res.objective_trace.push_back(f);
  StopTracker stop{cfg};
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const HermitianMatrix trial = from_hermitian_coordinates(s - step * model.gradient(s), m);
    Spectrum sp = eig_hermitian(trial);
    for (Index k = 0; k < m; ++k) {
      const double v = sp.eigenvalues(k);
      sp.eigenvalues(k) = std::copysign(std::max(std::abs(v) - step * epsilon_nuc, 0.0), v);
    }
    const RVector next = hermitian_coordinates(sp.reconstruct());
    res.residual = (next - s).norm() / step;
    const double f_next = objective(next);
    check_finite(f_next, iter);
    s = next;
    ++res.iterations;
    res.objective_trace.push_back(f_next);
    if (res.residual <= tol) break;
    const bool stagnant = stop.record(f, f_next);
    f = f_next;
    if (stagnant) break;
  }
  res.converged = res.residual <= tol;
  res.estimate = from_hermitian_coordinates(s, m);
  return res;
}

RVector project_to_simplex(const RVector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0);
}

}  // namespace dmest
