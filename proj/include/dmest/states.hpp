#pragma once

// Density matrices, von Neumann entropy, noncommutative distances between
// states, subspace projectors and Gibbs states.

#include "dmest/hermitian.hpp"
#include "dmest/rng.hpp"

namespace dmest {

/// Hermitian, PSD (eigenvalues >= -1e-10) and unit trace (to 1e-10).
class DensityMatrix {
 public:
  explicit DensityMatrix(HermitianMatrix m);

  static DensityMatrix maximally_mixed(Index dim);
  static DensityMatrix pure(const CVector& v);
  /// Builds V diag(p) V^* from a probability vector, skipping validation of
  /// the result (the caller guarantees p >= 0, sum p = 1, V unitary).
  static DensityMatrix from_probabilities(const RVector& p, const CMatrix& vectors);

  const HermitianMatrix& matrix() const { return m_; }
  Index dim() const { return m_.dim(); }
  operator const HermitianMatrix&() const { return m_; }

 private:
  struct Trusted {};
  DensityMatrix(HermitianMatrix m, Trusted) : m_(std::move(m)) {}
  HermitianMatrix m_;
};

/// Orthogonal projection P onto an r-dimensional subspace L of C^m.
class SubspaceProjector {
 public:
  /// Projector onto the column span of `basis` (orthonormalized internally;
  /// columns must be linearly independent).
  explicit SubspaceProjector(const CMatrix& basis);
  /// Projector onto span(e_0..e_{r-1}) of the standard basis.
  static SubspaceProjector coordinate(Index dim, Index rank);

  Index dim_ambient() const { return p_.dim(); }
  Index rank() const { return q_.cols(); }
  const HermitianMatrix& matrix() const { return p_; }
  /// Orthonormal basis of L (m x r).
  const CMatrix& basis() const { return q_; }
  /// I - P as a matrix.
  HermitianMatrix complement() const { return HermitianMatrix::identity(dim_ambient()) - p_; }
  /// P A P.
  HermitianMatrix compress(const HermitianMatrix& a) const { return a.congruence(p_.mat()); }

 private:
  CMatrix q_;
  HermitianMatrix p_;
};

/// tr(S log S), with 0 log 0 = 0.
double entropy_penalty(const DensityMatrix& s);

/// K(S1 || S2) = tr(S1 (log S1 - log S2)). S2 must be strictly positive
/// definite; S1 may be rank deficient.
double kl_divergence(const DensityMatrix& s1, const DensityMatrix& s2);

/// K(S1; S2) = tr((S1 - S2)(log S1 - log S2)); both must be full rank.
double symmetrized_kl(const DensityMatrix& s1, const DensityMatrix& s2);

/// tr sqrt(S1^{1/2} S2 S1^{1/2}).
double fidelity(const DensityMatrix& s1, const DensityMatrix& s2);

/// 2 (1 - F(S1, S2)), clamped to [0, 2].
double hellinger_sq(const DensityMatrix& s1, const DensityMatrix& s2);

/// ||S1 - S2||_1.
double trace_distance(const DensityMatrix& s1, const DensityMatrix& s2);

struct InequalitySides {
  double lhs;
  double rhs;
};

/// Both sides of ||P S1 P||_1 <= 2 ||P S2 P||_1 + 2 H^2(S1, S2).
InequalitySides rank_transfer_check(const DensityMatrix& s1, const DensityMatrix& s2, const SubspaceProjector& p);

// Gibbs states. These use the ascending eigenvalue convention
// gamma_1 <= ... <= gamma_m of H (the Spectrum type itself is descending).

/// e^{-H} / tr e^{-H}, evaluated after shifting the spectrum by its minimum.
DensityMatrix gibbs_state(const HermitianMatrix& h);

/// delta_r(H) = sum_{k > r} e^{-gamma_k} / sum_k e^{-gamma_k}.
double gibbs_tail(const HermitianMatrix& h, Index r);

struct TruncatedHamiltonian {
  HermitianMatrix low;  ///< H_{<=r} = sum_{j<=r} gamma_j e_j e_j^*
  double gamma_r;       ///< ||H_{<=r}||_2^2 = sum_{j<=r} gamma_j^2
};

TruncatedHamiltonian gibbs_truncate(const HermitianMatrix& h, Index r);

/// L_r = span of the eigenvectors of the r smallest eigenvalues of H.
SubspaceProjector bottom_eigenspace(const HermitianMatrix& h, Index r);

/// Haar-distributed unitary (QR of a complex Ginibre matrix with phase fix).
CMatrix random_unitary(Index dim, Rng& rng);

/// Random state of exact rank `rank`: Exponential(1) weights on `rank`
/// coordinates normalized to sum 1, conjugated by a Haar unitary.
DensityMatrix random_density(Index dim, Index rank, Rng& rng);

}  // namespace dmest
