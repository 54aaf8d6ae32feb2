#pragma once

// Dense complex Hermitian matrices, spectral decomposition, matrix functions
// and Schatten norms.

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace dmest {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Eigenvalues below this are clamped before log / xlogx.
inline constexpr double kEigFloor = 1e-14;

/// Symmetry violations up to this (relative to the largest entry) are
/// silently projected away by the constructor; larger ones are rejected.
inline constexpr double kHermitianTolerance = 1e-8;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Argument of an operation lies outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operands have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense m x m Hermitian matrix. Storage is always exactly Hermitian: every
/// constructor and arithmetic operation re-symmetrizes the entries.
class HermitianMatrix {
 public:
  HermitianMatrix() : HermitianMatrix(1) {}
  explicit HermitianMatrix(Index dim);
  explicit HermitianMatrix(CMatrix entries);

  static HermitianMatrix identity(Index dim);
  static HermitianMatrix zero(Index dim) { return HermitianMatrix(dim); }
  static HermitianMatrix diagonal(const RVector& diag);
  /// V diag(values) V^*.
  static HermitianMatrix from_spectrum(const RVector& values, const CMatrix& vectors);
  /// |v><v|.
  static HermitianMatrix outer(const CVector& v);

  Index dim() const { return m_.rows(); }
  const CMatrix& mat() const { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.diagonal().real().sum(); }
  /// Largest absolute entry.
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

  HermitianMatrix& operator+=(const HermitianMatrix& other);
  HermitianMatrix& operator-=(const HermitianMatrix& other);
  HermitianMatrix& operator*=(double s);

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator/(HermitianMatrix a, double s) { return a *= (1.0 / s); }
  HermitianMatrix operator-() const { return *this * -1.0; }

  /// A + c I.
  HermitianMatrix shifted(double c) const;
  /// B A B^* for arbitrary B (used for compressions P A P).
  HermitianMatrix congruence(const CMatrix& b) const;

 private:
  void symmetrize();
  CMatrix m_;
};

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b, const char* what);

/// Eigen-decomposition with eigenvalues sorted in decreasing order.
struct Spectrum {
  RVector eigenvalues;
  CMatrix eigenvectors;

  Index dim() const { return eigenvalues.size(); }
  HermitianMatrix reconstruct() const { return HermitianMatrix::from_spectrum(eigenvalues, eigenvectors); }
};

Spectrum eig_hermitian(const HermitianMatrix& a);

enum class MatrixFunction { log, exp, sqrt, xlogx };

const char* to_string(MatrixFunction f);

/// V f(diag(lambda)) V^*. log and xlogx clamp eigenvalues in [-tol, eig_floor)
/// up to eig_floor, sqrt clamps [-tol, 0) to 0; anything more negative is a
/// DomainError. tol = 1e-10 * max(1, ||A||).
HermitianMatrix matrix_func(const HermitianMatrix& a, MatrixFunction f, double eig_floor = kEigFloor);
HermitianMatrix matrix_func(const Spectrum& s, MatrixFunction f, double eig_floor = kEigFloor);

/// Schatten p-norm; pass kInfinity for the operator norm.
double schatten_norm(const HermitianMatrix& a, double p);
double schatten_norm(const Spectrum& s, double p);
inline double operator_norm(const HermitianMatrix& a) { return schatten_norm(a, kInfinity); }
inline double nuclear_norm(const HermitianMatrix& a) { return schatten_norm(a, 1.0); }
/// Entrywise Frobenius norm (no eigendecomposition).
double frobenius_norm(const HermitianMatrix& a);

/// <A, B> = tr(A B^*), real for Hermitian arguments.
double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b);

/// Kronecker product A (x) B.
HermitianMatrix tensor_product(const HermitianMatrix& a, const HermitianMatrix& b);

}  // namespace dmest
