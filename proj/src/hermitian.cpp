#include "dmest/hermitian.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dmest {

HermitianMatrix::HermitianMatrix(Index dim) {
  if (dim < 1) throw DimensionError(fmt::format("HermitianMatrix: dimension must be >= 1, got {}", dim));
  m_ = CMatrix::Zero(dim, dim);
}

HermitianMatrix::HermitianMatrix(CMatrix entries) : m_(std::move(entries)) {
  if (m_.rows() < 1 || m_.rows() != m_.cols())
    throw DimensionError(fmt::format("HermitianMatrix: expected a non-empty square matrix, got {}x{}", m_.rows(),
                                     m_.cols()));
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= kHermitianTolerance * scale))
    throw DomainError(fmt::format("HermitianMatrix: input is not Hermitian (max |A - A*| = {:.3e})", asym));
  symmetrize();
}

HermitianMatrix HermitianMatrix::identity(Index dim) {
  HermitianMatrix h(dim);
  h.m_.setIdentity();
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& diag) {
  HermitianMatrix h(diag.size());
  h.m_.diagonal() = diag.cast<Complex>();
  return h;
}

HermitianMatrix HermitianMatrix::from_spectrum(const RVector& values, const CMatrix& vectors) {
  if (vectors.cols() != values.size())
    throw DimensionError("from_spectrum: eigenvector count does not match eigenvalue count");
  HermitianMatrix h(vectors.rows());
  h.m_.noalias() = vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
  h.symmetrize();
  return h;
}

HermitianMatrix HermitianMatrix::outer(const CVector& v) {
  HermitianMatrix h(v.size());
  h.m_.noalias() = v * v.adjoint();
  h.symmetrize();
  return h;
}

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b, const char* what) {
  if (a.dim() != b.dim()) throw DimensionError(fmt::format("{}: dimension mismatch ({} vs {})", what, a.dim(), b.dim()));
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  require_same_dim(*this, other, "operator+");
  m_ += other.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& other) {
  require_same_dim(*this, other, "operator-");
  m_ -= other.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermitianMatrix HermitianMatrix::shifted(double c) const {
  HermitianMatrix h = *this;
  h.m_.diagonal().array() += c;
  return h;
}

HermitianMatrix HermitianMatrix::congruence(const CMatrix& b) const {
  if (b.cols() != dim()) throw DimensionError("congruence: operand has the wrong number of columns");
  HermitianMatrix h(b.rows());
  h.m_.noalias() = b * m_ * b.adjoint();
  h.symmetrize();
  return h;
}

void HermitianMatrix::symmetrize() {
  // Exact Hermitian storage: real diagonal, lower triangle mirrors upper.
  const Index m = m_.rows();
  for (Index j = 0; j < m; ++j) {
    m_(j, j) = Complex(m_(j, j).real(), 0.0);
    for (Index i = j + 1; i < m; ++i) {
      const Complex avg = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
      m_(i, j) = avg;
      m_(j, i) = std::conj(avg);
    }
  }
}

Spectrum eig_hermitian(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.mat(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error(fmt::format("eig_hermitian: eigensolver did not converge for a {}x{} matrix", a.dim(),
                                         a.dim()));
  // Eigen returns ascending order; reverse to decreasing.
  Spectrum s;
  s.eigenvalues = solver.eigenvalues().reverse();
  s.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return s;
}

const char* to_string(MatrixFunction f) {
  switch (f) {
    case MatrixFunction::log: return "log";
    case MatrixFunction::exp: return "exp";
    case MatrixFunction::sqrt: return "sqrt";
    case MatrixFunction::xlogx: return "xlogx";
  }
  return "?";
}

HermitianMatrix matrix_func(const Spectrum& s, MatrixFunction f, double eig_floor) {
  const RVector& lam = s.eigenvalues;
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double neg_tol = 1e-10 * scale;
  RVector out(lam.size());
  for (Index k = 0; k < lam.size(); ++k) {
    double x = lam(k);
    if (f != MatrixFunction::exp && x < -neg_tol)
      throw DomainError(fmt::format("matrix_func({}): eigenvalue {:.6e} is outside the domain", to_string(f), x));
    switch (f) {
      case MatrixFunction::exp: out(k) = std::exp(x); break;
      case MatrixFunction::sqrt: out(k) = std::sqrt(std::max(x, 0.0)); break;
      case MatrixFunction::log: out(k) = std::log(std::max(x, eig_floor)); break;
      case MatrixFunction::xlogx:
        // 0 log 0 = 0; tiny eigenvalues contribute x log(floor) -> 0.
        x = std::max(x, 0.0);
        out(k) = x * std::log(std::max(x, eig_floor));
        break;
    }
  }
  return HermitianMatrix::from_spectrum(out, s.eigenvectors);
}

HermitianMatrix matrix_func(const HermitianMatrix& a, MatrixFunction f, double eig_floor) {
  return matrix_func(eig_hermitian(a), f, eig_floor);
}

double schatten_norm(const Spectrum& s, double p) {
  if (!(p >= 1.0)) throw DomainError(fmt::format("schatten_norm: p must lie in [1, inf], got {}", p));
  const RVector abs = s.eigenvalues.cwiseAbs();
  if (std::isinf(p)) return abs.maxCoeff();
  if (p == 1.0) return abs.sum();
  const double top = abs.maxCoeff();
  if (top == 0.0) return 0.0;
  // Scale by the largest value to avoid overflow for large p.
  return top * std::pow((abs / top).array().pow(p).sum(), 1.0 / p);
}

double schatten_norm(const HermitianMatrix& a, double p) {
  if (!(p >= 1.0)) throw DomainError(fmt::format("schatten_norm: p must lie in [1, inf], got {}", p));
  return schatten_norm(eig_hermitian(a), p);
}

double frobenius_norm(const HermitianMatrix& a) { return a.mat().norm(); }

double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "hs_inner");
  // tr(A B^*) = sum_ij A_ij conj(B_ij); the imaginary part cancels for Hermitian inputs.
  return (a.mat().array() * b.mat().conjugate().array()).real().sum();
}

HermitianMatrix tensor_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  const Index ma = a.dim(), mb = b.dim();
  CMatrix k(ma * mb, ma * mb);
  for (Index i = 0; i < ma; ++i)
    for (Index j = 0; j < ma; ++j) k.block(i * mb, j * mb, mb, mb) = a(i, j) * b.mat();
  return HermitianMatrix(std::move(k));
}

}  // namespace dmest
