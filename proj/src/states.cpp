#include "dmest/states.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dmest {

namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr double kTraceTolerance = 1e-10;

/// Ascending eigenvalues and matching eigenvectors.
Spectrum ascending(const HermitianMatrix& h) {
  Spectrum s = eig_hermitian(h);
  s.eigenvalues.reverseInPlace();
  s.eigenvectors = s.eigenvectors.rowwise().reverse().eval();
  return s;
}

void check_rank_arg(Index r, Index m, const char* what) {
  if (r < 0 || r > m) throw std::out_of_range(fmt::format("{}: r = {} outside [0, {}]", what, r, m));
}

double xlogx_sum(const RVector& lam) {
  double acc = 0.0;
  for (double x : lam) {
    if (x > 0.0) acc += x * std::log(x);
  }
  return acc;
}

}  // namespace

DensityMatrix::DensityMatrix(HermitianMatrix m) : m_(std::move(m)) {
  const double tr = m_.trace();
  if (!(std::abs(tr - 1.0) <= kTraceTolerance))
    throw DomainError(fmt::format("DensityMatrix: trace {:.12f} differs from 1", tr));
  const double lmin = eig_hermitian(m_).eigenvalues.minCoeff();
  if (!(lmin >= -kPsdTolerance))
    throw DomainError(fmt::format("DensityMatrix: smallest eigenvalue {:.3e} is negative", lmin));
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  return DensityMatrix(HermitianMatrix::identity(dim) / static_cast<double>(dim), Trusted{});
}

DensityMatrix DensityMatrix::pure(const CVector& v) {
  const double nrm = v.norm();
  if (nrm == 0.0) throw DomainError("DensityMatrix::pure: zero vector");
  return DensityMatrix(HermitianMatrix::outer(v / nrm), Trusted{});
}

DensityMatrix DensityMatrix::from_probabilities(const RVector& p, const CMatrix& vectors) {
  return DensityMatrix(HermitianMatrix::from_spectrum(p, vectors), Trusted{});
}

SubspaceProjector::SubspaceProjector(const CMatrix& basis) : p_(basis.rows() > 0 ? basis.rows() : 1) {
  const Index m = basis.rows(), r = basis.cols();
  if (m < 1 || r > m) throw DimensionError(fmt::format("SubspaceProjector: invalid basis shape {}x{}", m, r));
  if (r == 0) {
    q_ = CMatrix(m, 0);
    return;
  }
  Eigen::HouseholderQR<CMatrix> qr(basis);
  const CMatrix rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, basis.cwiseAbs().maxCoeff());
  for (Index k = 0; k < r; ++k)
    if (std::abs(rr(k, k)) < 1e-10 * scale)
      throw DomainError("SubspaceProjector: basis columns are linearly dependent");
  q_ = qr.householderQ() * CMatrix::Identity(m, r);
  p_ = HermitianMatrix(q_ * q_.adjoint());
}

SubspaceProjector SubspaceProjector::coordinate(Index dim, Index rank) {
  check_rank_arg(rank, dim, "SubspaceProjector::coordinate");
  return SubspaceProjector(CMatrix::Identity(dim, rank));
}

double entropy_penalty(const DensityMatrix& s) { return xlogx_sum(eig_hermitian(s.matrix()).eigenvalues); }

double kl_divergence(const DensityMatrix& s1, const DensityMatrix& s2) {
  require_same_dim(s1.matrix(), s2.matrix(), "kl_divergence");
  const Spectrum sp2 = eig_hermitian(s2.matrix());
  if (sp2.eigenvalues.minCoeff() <= kEigFloor)
    throw DomainError(fmt::format("kl_divergence: second argument is rank deficient (smallest eigenvalue {:.3e})",
                                  sp2.eigenvalues.minCoeff()));
  const HermitianMatrix log2 = matrix_func(sp2, MatrixFunction::log);
  return entropy_penalty(s1) - hs_inner(s1.matrix(), log2);
}

double symmetrized_kl(const DensityMatrix& s1, const DensityMatrix& s2) {
  require_same_dim(s1.matrix(), s2.matrix(), "symmetrized_kl");
  const Spectrum sp1 = eig_hermitian(s1.matrix());
  const Spectrum sp2 = eig_hermitian(s2.matrix());
  if (sp1.eigenvalues.minCoeff() <= kEigFloor || sp2.eigenvalues.minCoeff() <= kEigFloor)
    throw DomainError("symmetrized_kl: both arguments must be full rank");
  const HermitianMatrix dlog = matrix_func(sp1, MatrixFunction::log) - matrix_func(sp2, MatrixFunction::log);
  return hs_inner(s1.matrix() - s2.matrix(), dlog);
}

double fidelity(const DensityMatrix& s1, const DensityMatrix& s2) {
  require_same_dim(s1.matrix(), s2.matrix(), "fidelity");
  const HermitianMatrix root = matrix_func(s1.matrix(), MatrixFunction::sqrt);
  const HermitianMatrix inner = s2.matrix().congruence(root.mat());
  const RVector lam = eig_hermitian(inner).eigenvalues;
  double f = 0.0;
  for (double x : lam) f += std::sqrt(std::max(x, 0.0));
  return f;
}

double hellinger_sq(const DensityMatrix& s1, const DensityMatrix& s2) {
  return std::clamp(2.0 * (1.0 - fidelity(s1, s2)), 0.0, 2.0);
}

double trace_distance(const DensityMatrix& s1, const DensityMatrix& s2) {
  require_same_dim(s1.matrix(), s2.matrix(), "trace_distance");
  return nuclear_norm(s1.matrix() - s2.matrix());
}

InequalitySides rank_transfer_check(const DensityMatrix& s1, const DensityMatrix& s2, const SubspaceProjector& p) {
  require_same_dim(s1.matrix(), p.matrix(), "rank_transfer_check");
  const double lhs = nuclear_norm(p.compress(s1.matrix()));
  const double rhs = 2.0 * nuclear_norm(p.compress(s2.matrix())) + 2.0 * hellinger_sq(s1, s2);
  return {lhs, rhs};
}

DensityMatrix gibbs_state(const HermitianMatrix& h) {
  const Spectrum s = eig_hermitian(h);
  const double gmin = s.eigenvalues.minCoeff();
  RVector w = (-(s.eigenvalues.array() - gmin)).exp();
  w /= w.sum();
  return DensityMatrix::from_probabilities(w, s.eigenvectors);
}

double gibbs_tail(const HermitianMatrix& h, Index r) {
  check_rank_arg(r, h.dim(), "gibbs_tail");
  const RVector g = ascending(h).eigenvalues;
  const RVector w = (-(g.array() - g(0))).exp();
  return w.tail(h.dim() - r).sum() / w.sum();
}

TruncatedHamiltonian gibbs_truncate(const HermitianMatrix& h, Index r) {
  check_rank_arg(r, h.dim(), "gibbs_truncate");
  const Spectrum s = ascending(h);
  RVector low = RVector::Zero(h.dim());
  low.head(r) = s.eigenvalues.head(r);
  return {HermitianMatrix::from_spectrum(low, s.eigenvectors), low.squaredNorm()};
}

SubspaceProjector bottom_eigenspace(const HermitianMatrix& h, Index r) {
  check_rank_arg(r, h.dim(), "bottom_eigenspace");
  return SubspaceProjector(ascending(h).eigenvectors.leftCols(r));
}

CMatrix random_unitary(Index dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix z(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) z(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  // Multiply column k by the phase of R_kk so the law is Haar.
  const CMatrix& r = qr.matrixQR();
  for (Index k = 0; k < dim; ++k) {
    const double a = std::abs(r(k, k));
    if (a > 0.0) q.col(k) *= r(k, k) / a;
  }
  return q;
}

DensityMatrix random_density(Index dim, Index rank, Rng& rng) {
  if (rank < 1 || rank > dim)
    throw std::out_of_range(fmt::format("random_density: rank {} outside [1, {}]", rank, dim));
  std::exponential_distribution<double> expo(1.0);
  RVector p = RVector::Zero(dim);
  for (Index k = 0; k < rank; ++k) p(k) = expo(rng);
  p /= p.sum();
  return DensityMatrix::from_probabilities(p, random_unitary(dim, rng));
}

}  // namespace dmest
