#include "dmest/states.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace dmest;
using namespace dmest::testing;

namespace {

RVector vec(std::initializer_list<double> xs) {
  RVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double classical_kl(const RVector& p, const RVector& q) {
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

CVector unit(Index m, Index k) {
  CVector v = CVector::Zero(m);
  v[k] = 1.0;
  return v;
}

}  // namespace

TEST_SUITE("states") {

TEST_CASE("density matrix validation") {
  CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
  CHECK_THROWS_AS(DensityMatrix(HermitianMatrix::identity(2)), DomainError);
  CHECK_THROWS_AS(DensityMatrix(HermitianMatrix::diagonal(vec({1.5, -0.5}))), DomainError);
  const auto p = DensityMatrix::pure(CVector::Ones(3));
  CHECK(p.matrix().trace() == doctest::Approx(1.0));
  CHECK(eig_hermitian(p.matrix()).eigenvalues[0] == doctest::Approx(1.0));
}

TEST_CASE("subspace projector invariants") {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Index m = 2 + i % 6, r = 1 + i % m;
    const SubspaceProjector p(random_complex(m, r, rng));
    const CMatrix pm = p.matrix().mat();
    CHECK(max_abs_diff(pm * pm, pm) <= 1e-10);
    CHECK(p.matrix().trace() == doctest::Approx(static_cast<double>(r)).epsilon(1e-8));
    CHECK(p.rank() == r);
  }
  const auto c = SubspaceProjector::coordinate(4, 2);
  CHECK(c.matrix()(0, 0).real() == 1.0);
  CHECK(c.matrix()(2, 2).real() == 0.0);
  CMatrix dep(3, 2);
  dep << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(SubspaceProjector{dep}, DomainError);
}

TEST_CASE("entropy penalty") {
  CHECK(entropy_penalty(DensityMatrix::maximally_mixed(5)) == doctest::Approx(-std::log(5.0)));
  CHECK(entropy_penalty(DensityMatrix::pure(unit(3, 1))) == doctest::Approx(0.0));
  CHECK(entropy_penalty(diagonal_state(vec({0.75, 0.25}))) ==
        doctest::Approx(0.75 * std::log(0.75) + 0.25 * std::log(0.25)));
}

TEST_CASE("entropy penalty is convex along segments") {
  Rng rng(4);
  for (int i = 0; i < 60; ++i) {
    const Index m = 2 + i % 5;
    const auto s1 = random_density(m, 1 + i % m, rng), s2 = random_density(m, m, rng);
    for (double t : {0.25, 0.5, 0.75}) {
      const DensityMatrix mix(s1.matrix() * t + s2.matrix() * (1.0 - t));
      CHECK(entropy_penalty(mix) <= t * entropy_penalty(s1) + (1 - t) * entropy_penalty(s2) + 1e-10);
    }
  }
}

TEST_CASE("relative entropy") {
  Rng rng(6);
  const auto s = random_full_rank(4, rng);
  CHECK(std::abs(kl_divergence(s, s)) <= 1e-10);

  const RVector p = vec({0.5, 0.5}), q = vec({0.75, 0.25});
  CHECK(kl_divergence(diagonal_state(p), diagonal_state(q)) ==
        doctest::Approx(0.5 * std::log(4.0 / 3.0)));
  CHECK(kl_divergence(diagonal_state(p), diagonal_state(q)) == doctest::Approx(classical_kl(p, q)));

  for (int i = 0; i < 100; ++i) {
    const Index m = 2 + i % 6;
    CHECK(kl_divergence(random_full_rank(m, rng), random_full_rank(m, rng)) >= -1e-10);
  }
  CHECK_THROWS_AS(kl_divergence(s, DensityMatrix::pure(unit(4, 0))), DomainError);
  CHECK_NOTHROW(kl_divergence(DensityMatrix::pure(unit(4, 0)), s));
}

TEST_CASE("symmetrized relative entropy") {
  Rng rng(8);
  const auto s = random_full_rank(3, rng);
  CHECK(std::abs(symmetrized_kl(s, s)) <= 1e-10);
  for (int i = 0; i < 50; ++i) {
    const Index m = 2 + i % 5;
    const auto a = random_full_rank(m, rng), b = random_full_rank(m, rng);
    const double k = symmetrized_kl(a, b);
    CHECK(k == doctest::Approx(kl_divergence(a, b) + kl_divergence(b, a)).epsilon(1e-8));
    CHECK(k == doctest::Approx(symmetrized_kl(b, a)).epsilon(1e-10));
    CHECK(k >= 0.0);
  }
  const RVector p = random_probabilities(4, rng, 0.05), q = random_probabilities(4, rng, 0.05);
  CHECK(symmetrized_kl(diagonal_state(p), diagonal_state(q)) ==
        doctest::Approx(classical_kl(p, q) + classical_kl(q, p)).epsilon(1e-10));
  CHECK_THROWS_AS(symmetrized_kl(s, DensityMatrix::pure(unit(3, 0))), DomainError);
}

TEST_CASE("fidelity and Hellinger distance") {
  Rng rng(10);
  const auto s = random_density(4, 2, rng);
  CHECK(fidelity(s, s) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(hellinger_sq(s, s) <= 1e-8);
  const auto e0 = DensityMatrix::pure(unit(3, 0)), e1 = DensityMatrix::pure(unit(3, 1));
  CHECK(fidelity(e0, e1) == doctest::Approx(0.0));
  CHECK(hellinger_sq(e0, e1) == doctest::Approx(2.0));

  for (int i = 0; i < 30; ++i) {
    const RVector p = random_probabilities(5, rng), q = random_probabilities(5, rng);
    double bhatt = 0.0, hel = 0.0;
    for (Index k = 0; k < 5; ++k) {
      bhatt += std::sqrt(p[k] * q[k]);
      hel += std::pow(std::sqrt(p[k]) - std::sqrt(q[k]), 2);
    }
    CHECK(fidelity(diagonal_state(p), diagonal_state(q)) == doctest::Approx(bhatt).epsilon(1e-8));
    CHECK(hellinger_sq(diagonal_state(p), diagonal_state(q)) == doctest::Approx(hel).epsilon(1e-7));
  }
  for (int i = 0; i < 30; ++i) {
    const auto a = random_density(3, 1 + i % 3, rng), b = random_density(3, 3, rng);
    const double f = fidelity(a, b);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-8);
    CHECK(f == doctest::Approx(fidelity(b, a)).epsilon(1e-8));
  }
}

TEST_CASE("trace distance") {
  Rng rng(12);
  const auto s = random_density(3, 2, rng);
  CHECK(trace_distance(s, s) <= 1e-12);
  CHECK(trace_distance(DensityMatrix::pure(unit(2, 0)), DensityMatrix::pure(unit(2, 1))) == doctest::Approx(2.0));
  for (int i = 0; i < 30; ++i) {
    const auto a = random_density(4, 4, rng), b = random_density(4, 2, rng), c = random_density(4, 1, rng);
    CHECK(trace_distance(a, b) == doctest::Approx(schatten_norm(a.matrix() - b.matrix(), 1.0)));
    CHECK(trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12);
    CHECK(trace_distance(a, b) <= 2.0 + 1e-12);
  }
}

TEST_CASE("distance ordering: (trace/2)^2 <= H^2 <= K") {
  Rng rng(14);
  for (Index m : {2, 4, 8})
    for (int i = 0; i < 200; ++i) {
      const auto a = random_full_rank(m, rng, 0.001), b = random_full_rank(m, rng, 0.001);
      const double h2 = hellinger_sq(a, b);
      CHECK(std::pow(trace_distance(a, b) / 2.0, 2) <= h2 + 1e-8);
      CHECK(h2 <= std::min(kl_divergence(a, b), kl_divergence(b, a)) + 1e-8);
    }
}

TEST_CASE("rank transfer inequality") {
  Rng rng(16);
  const auto s = random_density(4, 2, rng);
  const SubspaceProjector p(random_complex(4, 2, rng));
  const auto same = rank_transfer_check(s, s, p);
  CHECK(same.lhs == doctest::Approx(nuclear_norm(p.compress(s.matrix()))));
  CHECK(same.lhs <= same.rhs);
  const auto full = rank_transfer_check(s, random_density(4, 4, rng), SubspaceProjector::coordinate(4, 4));
  CHECK(full.lhs == doctest::Approx(1.0));
  CHECK(full.rhs >= 2.0);

  for (Index m : {2, 4, 8})
    for (int i = 0; i < 200; ++i) {
      const auto a = random_density(m, 1 + i % m, rng), b = random_density(m, 1 + (i / 3) % m, rng);
      const SubspaceProjector q(random_complex(m, 1 + (i / 7) % m, rng));
      const auto sides = rank_transfer_check(a, b, q);
      CHECK(sides.lhs <= sides.rhs + 1e-8);
    }
}

TEST_CASE("Gibbs states") {
  const auto g0 = gibbs_state(HermitianMatrix::zero(4));
  CHECK(max_abs_diff(g0.matrix().mat(), CMatrix::Identity(4, 4) / 4.0) <= 1e-14);
  const auto g = gibbs_state(HermitianMatrix::diagonal(vec({0.0, std::log(3.0)})));
  CHECK(g.matrix()(0, 0).real() == doctest::Approx(0.75));
  CHECK(g.matrix()(1, 1).real() == doctest::Approx(0.25));

  Rng rng(18);
  for (int i = 0; i < 20; ++i) {
    const auto h = random_hermitian(5, rng, 3.0);
    const auto a = gibbs_state(h), b = gibbs_state(h.shifted(7.5));
    CHECK(max_abs_diff(a.matrix().mat(), b.matrix().mat()) <= 1e-12);
    CHECK(a.matrix().trace() == doctest::Approx(1.0));
  }
  // Large spectra do not overflow.
  const auto big = gibbs_state(HermitianMatrix::diagonal(vec({1000.0, 1001.0})));
  CHECK(big.matrix()(0, 0).real() == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("Gibbs tail") {
  Rng rng(20);
  const auto h = random_hermitian(6, rng, 2.0);
  CHECK(gibbs_tail(h, 6) == doctest::Approx(0.0));
  CHECK(gibbs_tail(HermitianMatrix::zero(6), 3) == doctest::Approx(0.5));
  CHECK_THROWS(gibbs_tail(h, 7));
  CHECK_THROWS(gibbs_tail(h, -1));

  const auto rho = gibbs_state(h);
  double prev = 1.0 + 1e-15;
  for (Index r = 0; r <= 6; ++r) {
    const double d = gibbs_tail(h, r);
    CHECK(d >= 0.0);
    CHECK(d <= prev);
    prev = d;
    const auto l = bottom_eigenspace(h, r == 0 ? 1 : r);
    if (r == 0) continue;
    const double tail = nuclear_norm(rho.matrix().congruence(l.complement().mat()));
    const double head = nuclear_norm(l.compress(rho.matrix()));
    CHECK(d == doctest::Approx(tail).epsilon(1e-10));
    CHECK(d + head == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("Gibbs truncation") {
  const auto h = HermitianMatrix::diagonal(vec({1.0, 2.0, 3.0}));
  const auto zero = gibbs_truncate(h, 0);
  CHECK(zero.low.max_abs() == 0.0);
  CHECK(zero.gamma_r == 0.0);
  const auto all = gibbs_truncate(h, 3);
  CHECK(max_abs_diff(all.low.mat(), h.mat()) <= 1e-12);
  CHECK(all.gamma_r == doctest::Approx(14.0));
  const auto two = gibbs_truncate(h, 2);
  CHECK(max_abs_diff(two.low.mat(), HermitianMatrix::diagonal(vec({1.0, 2.0, 0.0})).mat()) <= 1e-12);
  CHECK(two.gamma_r == doctest::Approx(5.0));

  Rng rng(22);
  const auto r = random_hermitian(5, rng);
  const auto t = gibbs_truncate(r, 2);
  const auto ev = eig_hermitian(t.low).eigenvalues;
  int nonzero = 0;
  for (Index i = 0; i < 5; ++i) nonzero += std::abs(ev[i]) > 1e-10;
  CHECK(nonzero <= 2);
}

TEST_CASE("random states") {
  Rng rng(24);
  for (Index m : {2, 3, 6}) {
    CHECK(entropy_penalty(random_density(m, 1, rng)) == doctest::Approx(0.0).epsilon(1e-10));
    const auto full = random_density(m, m, rng);
    const double e = entropy_penalty(full);
    CHECK(e > -std::log(static_cast<double>(m)));
    CHECK(e < 0.0);
    for (Index r = 1; r <= m; ++r) {
      const auto ev = eig_hermitian(random_density(m, r, rng).matrix()).eigenvalues;
      int positive = 0;
      for (Index i = 0; i < m; ++i) positive += ev[i] > 1e-12;
      CHECK(positive == r);
    }
  }
  Rng a(99), b(99);
  CHECK(random_density(4, 2, a).matrix().mat() == random_density(4, 2, b).matrix().mat());
  CHECK_THROWS(random_density(3, 4, rng));
  const CMatrix u = random_unitary(5, rng);
  CHECK(max_abs_diff(u.adjoint() * u, CMatrix::Identity(5, 5)) <= 1e-12);
}

}  // TEST_SUITE
