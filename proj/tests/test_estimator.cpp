#include "dmest/estimator.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace dmest;
using namespace dmest::testing;

namespace {

Dataset complete_basis_data(const DensityMatrix& rho) {
  Dataset data;
  const auto basis = basis_matrix_completion(rho.dim());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    data.designs.push_back(basis[j]);
    data.responses.push_back(hs_inner(rho.matrix(), basis[j]));
    data.design_indices.push_back(static_cast<Index>(j));
  }
  return data;
}

/// tr(S log S) from the Jacobi oracle eigenvalues.
double oracle_entropy(const DensityMatrix& s) {
  double acc = 0.0;
  for (double v : jacobi_eigenvalues(s.matrix()))
    if (v > 0) acc += v * std::log(v);
  return acc;
}

HermitianMatrix random_traceless(Index m, Rng& rng) {
  auto v = random_hermitian(m, rng);
  v = v.shifted(-v.trace() / double(m));
  return v / frobenius_norm(v);
}

bool monotone(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1] + 1e-12 * (1.0 + std::abs(trace[i - 1]))) return false;
  return true;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("solver configuration validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epsilon = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.backtrack_factor = 1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.tol_obj = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("empirical objective") {
  Rng rng(1);
  const auto rho = random_density(3, 2, rng);
  const auto noiseless = simulate_measurements(rho, make_design("mc-uniform", 3), NoiseModel::gaussian(0.0), 40, rng);
  CHECK(empirical_objective(rho, noiseless, 0.0) <= 1e-30);

  const auto mixed = DensityMatrix::maximally_mixed(3);
  const auto flat = simulate_measurements(mixed, make_design("mc-uniform", 3), NoiseModel::gaussian(0.0), 30, rng);
  CHECK(empirical_objective(mixed, flat, 0.7) == doctest::Approx(-0.7 * std::log(3.0)));

  const auto noisy = simulate_measurements(rho, make_design("gauss", 3), NoiseModel::gaussian(0.3), 50, rng);
  const auto s = random_density(3, 3, rng);
  double acc = 0.0;
  for (Index j = 0; j < noisy.size(); ++j) {
    Complex tr = 0;
    const auto& x = noisy.designs[static_cast<std::size_t>(j)];
    for (Index a = 0; a < 3; ++a)
      for (Index b = 0; b < 3; ++b) tr += s.matrix()(a, b) * x(b, a);
    acc += std::pow(noisy.responses[static_cast<std::size_t>(j)] - tr.real(), 2);
  }
  const double expected = acc / 50.0 + 0.2 * oracle_entropy(s);
  CHECK(empirical_objective(s, noisy, 0.2) == doctest::Approx(expected).epsilon(1e-12));
  // The quadratic model reproduces the same value.
  CHECK(model_objective(empirical_model(noisy), s, 0.2) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("known-design objective") {
  Rng rng(2);
  const Index m = 4;
  const auto d = make_design("pauli", m);
  const auto rho = random_density(m, 2, rng);
  const auto data = simulate_measurements(rho, d, NoiseModel::gaussian(0.1), 200, rng);
  const auto s = random_density(m, m, rng);
  double lin = 0.0;
  for (Index j = 0; j < data.size(); ++j)
    lin += data.responses[static_cast<std::size_t>(j)] * hs_inner(s.matrix(), data.designs[static_cast<std::size_t>(j)]);
  const double quad = std::pow(schatten_norm(s.matrix(), 2.0), 2) / double(m * m);
  CHECK(population_objective(s, d, data, 0.0) == doctest::Approx(quad - 2.0 * lin / 200.0).epsilon(1e-12));
  const auto mixed = DensityMatrix::maximally_mixed(m);
  double lin_mixed = 0.0;
  for (Index j = 0; j < data.size(); ++j)
    lin_mixed += data.responses[static_cast<std::size_t>(j)] * hs_inner(mixed.matrix(), data.designs[static_cast<std::size_t>(j)]);
  CHECK(population_objective(mixed, d, data, 0.0) ==
        doctest::Approx(1.0 / std::pow(double(m), 3) - 2.0 * lin_mixed / 200.0).epsilon(1e-12));
  CHECK(model_objective(known_design_model(data, d), s, 0.3) ==
        doctest::Approx(population_objective(s, d, data, 0.3)).epsilon(1e-10));

  // Noiseless, large n: rho beats nearby perturbations.
  const auto big = simulate_measurements(rho, d, NoiseModel::gaussian(0.0), 20000, rng);
  const double at_rho = population_objective(rho, d, big, 0.0);
  for (int i = 0; i < 10; ++i) {
    const DensityMatrix other(rho.matrix() * 0.9 + random_density(m, m, rng).matrix() * 0.1);
    CHECK(at_rho <= population_objective(other, d, big, 0.0));
  }
}

TEST_CASE("gradient") {
  Rng rng(3);
  const Index m = 3;
  const auto rho = random_density(m, m, rng);
  const auto exact = simulate_measurements(rho, make_design("mc-uniform", m), NoiseModel::gaussian(0.0), 60, rng);
  CHECK(gradient_empirical(rho, exact, 0.0).max_abs() <= 1e-14);

  Dataset zero = exact;
  std::fill(zero.responses.begin(), zero.responses.end(), 0.0);
  const auto mixed = DensityMatrix::maximally_mixed(m);
  const auto g = gradient_empirical(mixed, zero, 0.5);
  // Quadratic part: (2/n) sum tr(X/m) X, plus the entropy part.
  HermitianMatrix quad = HermitianMatrix::zero(m);
  for (const auto& x : zero.designs) quad += x * (2.0 * hs_inner(mixed.matrix(), x) / double(zero.size()));
  const auto expected = quad + HermitianMatrix::identity(m) * (0.5 * (std::log(1.0 / m) + 1.0));
  CHECK(max_abs_diff(g.mat(), expected.mat()) <= 1e-12);
  Dataset no_signal = zero;
  for (auto& x : no_signal.designs) x = HermitianMatrix::zero(m);
  CHECK(max_abs_diff(gradient_empirical(mixed, no_signal, 0.5).mat(),
                     (HermitianMatrix::identity(m) * (0.5 * (std::log(1.0 / m) + 1.0))).mat()) <= 1e-14);
}

TEST_CASE("gradient matches central differences") {
  Rng rng(4);
  for (const char* name : {"pauli", "gauss"}) {
    const Index m = 4;
    const auto d = make_design(name, m);
    const auto data = simulate_measurements(random_density(m, 2, rng), d, NoiseModel::gaussian(0.2), 100, rng);
    for (int point = 0; point < 5; ++point) {
      const auto s = random_full_rank(m, rng, 0.05);
      const auto g = gradient_empirical(s, data, 0.1);
      for (int dir = 0; dir < 10; ++dir) {
        const auto nu = random_traceless(m, rng);
        const double t = 1e-5;
        const DensityMatrix plus(s.matrix() + nu * t), minus(s.matrix() - nu * t);
        const double fd = (empirical_objective(plus, data, 0.1) - empirical_objective(minus, data, 0.1)) / (2 * t);
        CHECK(std::abs(hs_inner(g, nu) - fd) <= 1e-5);
      }
    }
  }
}

TEST_CASE("stationarity residual and Frank-Wolfe gap") {
  CHECK(stationarity_residual(HermitianMatrix::identity(3) * 2.5) <= 1e-15);
  RVector d(2);
  d << 1.0, -1.0;
  CHECK(stationarity_residual(HermitianMatrix::diagonal(d)) == doctest::Approx(1.0));
  // Gap is <G, S> - lambda_min(G): zero when S sits on the bottom eigenvector.
  const auto s = DensityMatrix::pure(CVector::Unit(2, 1));
  CHECK(frank_wolfe_gap(s, HermitianMatrix::diagonal(d)) == doctest::Approx(0.0));
  CHECK(frank_wolfe_gap(DensityMatrix::maximally_mixed(2), HermitianMatrix::diagonal(d)) == doctest::Approx(1.0));
}

TEST_CASE("simplex projection") {
  RVector v(3);
  v << 0.2, 0.3, 0.5;
  CHECK((project_to_simplex(v) - v).norm() <= 1e-15);
  v << 2.0, 0.0, -1.0;
  const RVector p = project_to_simplex(v);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[2] == 0.0);
  Rng rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    RVector x(5);
    for (Index k = 0; k < 5; ++k) x[k] = g(rng);
    const RVector y = project_to_simplex(x);
    CHECK(y.sum() == doctest::Approx(1.0));
    CHECK(y.minCoeff() >= 0.0);
    // Variational characterization: <x - y, q - y> <= 0 for simplex vertices q.
    for (Index k = 0; k < 5; ++k) CHECK((x - y).dot(RVector::Unit(5, k) - y) <= 1e-12);
  }
}

TEST_CASE("large penalty drives the estimate to the maximally mixed state") {
  Rng rng(6);
  const Index m = 4;
  const auto data = simulate_measurements(random_density(m, 1, rng), make_design("pauli", m), NoiseModel::gaussian(0.1), 300, rng);
  SolverConfig cfg;
  cfg.epsilon = 1e3 * (1.0 + empirical_model(data).data_scale);
  const auto res = solve_entropy_penalized(data, nullptr, cfg);
  CHECK(res.converged);
  CHECK(trace_distance(res.estimate, DensityMatrix::maximally_mixed(m)) <= 1e-3);
}

TEST_CASE("complete noiseless completion-basis data recovers the state") {
  Rng rng(7);
  for (Index m : {2, 3, 4}) {
    const auto rho = random_density(m, 1 + m / 2, rng);
    const auto data = complete_basis_data(rho);
    SolverConfig cfg;
    cfg.epsilon = 1e-8;
    const auto res = solve_entropy_penalized(data, nullptr, cfg);
    CHECK(trace_distance(res.estimate, rho) <= 1e-3);
    const auto nuc = solve_nuclear_baseline(data, 0.0);
    CHECK(nuclear_norm(nuc.estimate - rho.matrix()) <= 1e-4);
  }
}

TEST_CASE("solver dominance, convexity certificate and descent") {
  Rng rng(8);
  struct Case {
    const char* design;
    double epsilon;
    bool known;
  };
  for (const Case c : {Case{"pauli", 0.01, false}, Case{"pauli", 0.0, false}, Case{"mc-uniform", 0.003, false},
                       Case{"gauss", 0.05, false}, Case{"pauli", 0.02, true}, Case{"mc-entry", 0.01, false}}) {
    INFO(c.design, " eps=", c.epsilon, " known=", c.known);
    const Index m = 4;
    const auto d = make_design(c.design, m);
    const auto rho = random_density(m, 2, rng);
    const auto data = simulate_measurements(rho, d, NoiseModel::gaussian(0.1), 400, rng);
    SolverConfig cfg;
    cfg.epsilon = c.epsilon;
    const auto res = solve_entropy_penalized(data, c.known ? &d : nullptr, cfg);
    CHECK(res.converged);
    CHECK(res.stationarity_residual <= res.tol_stat);
    CHECK(monotone(res.objective_trace));
    const QuadraticModel model = c.known ? known_design_model(data, d) : empirical_model(data);
    const double f_hat = model_objective(model, res.estimate, c.epsilon);
    CHECK(f_hat <= model_objective(model, rho, c.epsilon) + 1e-12);
    CHECK(f_hat <= model_objective(model, DensityMatrix::maximally_mixed(m), c.epsilon) + 1e-12);
    const auto grad = model_gradient(model, res.estimate, c.epsilon);
    for (int i = 0; i < 20; ++i) {
      const auto s = random_density(m, 1 + i % m, rng);
      CHECK(f_hat <= model_objective(model, s, c.epsilon) + 1e-12);
      if (c.epsilon > 0) {
        const auto s_full = random_full_rank(m, rng);
        CHECK(hs_inner(grad, s_full.matrix() - res.estimate.matrix()) >= -10 * res.tol_stat);
      } else {
        CHECK(hs_inner(grad, s.matrix() - res.estimate.matrix()) >= -10 * res.tol_stat);
      }
    }
  }
}

TEST_CASE("empirical solution approaches the population solution as n grows") {
  const Index m = 4;
  const auto d = make_design("pauli", m);
  std::vector<double> small, large;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(77, {static_cast<std::uint64_t>(seed)}));
    const auto rho = random_density(m, m, rng);
    const double eps = 0.005;
    const auto pop = solve_population(rho, d, eps);
    for (Index n : {10000, 100000}) {
      const auto data = simulate_measurements(rho, d, NoiseModel::gaussian(0.1), n, rng);
      SolverConfig cfg;
      cfg.epsilon = eps;
      const auto emp = solve_entropy_penalized(data, nullptr, cfg);
      const double dist = l2_pi_norm(d, emp.estimate.matrix() - pop.estimate.matrix());
      (n == 10000 ? small : large).push_back(dist);
    }
  }
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  CHECK(large[10] < small[10]);
}

TEST_CASE("population solution converges to the truth as the penalty vanishes") {
  Rng rng(9);
  const auto d = make_design("pauli", 4);
  const auto rho = random_full_rank(4, rng, 0.05);
  double prev = kInfinity;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto res = solve_population(rho, d, eps);
    CHECK(res.converged);
    const double td = trace_distance(res.estimate, rho);
    CHECK(td < prev);
    prev = td;
  }
  CHECK(prev <= 1e-2);
}

TEST_CASE("nuclear baseline") {
  Rng rng(10);
  const auto rho = random_density(3, 1, rng);
  const auto data = simulate_measurements(rho, make_design("mc-uniform", 3), NoiseModel::gaussian(0.1), 200, rng);
  const auto huge = solve_nuclear_baseline(data, 1e6);
  CHECK(huge.estimate.max_abs() == 0.0);
  const auto res = solve_nuclear_baseline(data, 0.01);
  CHECK(monotone(res.objective_trace));
  CHECK(res.converged);
}

TEST_CASE("max_iter gives a partial, unconverged result") {
  Rng rng(11);
  const auto data = simulate_measurements(random_density(4, 1, rng), make_design("pauli", 4), NoiseModel::gaussian(0.1), 200, rng);
  SolverConfig cfg;
  cfg.epsilon = 1e-4;
  cfg.max_iter = 2;
  const auto res = solve_entropy_penalized(data, nullptr, cfg);
  CHECK_FALSE(res.converged);
  CHECK(res.stop_reason == "max_iter");
  CHECK(res.iterations == 2);
  CHECK(res.estimate.matrix().trace() == doctest::Approx(1.0));
}

}  // TEST_SUITE
