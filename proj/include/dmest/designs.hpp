#pragma once

// Design distributions: the measurement matrices X drawn i.i.d. from a law on
// Hermitian matrices, the L2 geometry that law induces, and the structural
// coefficients (alignment, compression, concentration constants) it carries.
//
// Coordinates. A Hermitian m x m matrix A is identified with the real vector
// of its inner products with the matrix completion basis, in the fixed order
//   A_00, A_11, ..., A_{m-1,m-1}                     (m diagonal entries)
//   sqrt(2) Re A_ij  for i < j, lexicographic        (m(m-1)/2)
//   sqrt(2) Im A_ij  for i < j, lexicographic        (m(m-1)/2)
// This map is an isometry from the Hilbert-Schmidt inner product to the
// Euclidean one, and every Gram matrix below is expressed in it.

#include "dmest/hermitian.hpp"
#include "dmest/rng.hpp"
#include "dmest/states.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dmest {

enum class DesignKind {
  MatrixCompletionUniform,  ///< uniform over the matrix completion basis
  MatrixCompletionEntry,    ///< entry sampling, weights 1/m^2 and 2/m^2
  PauliUniform,             ///< uniform over k-qubit Pauli tensor products
  GaussianIsotropic,        ///< real symmetric, N(0,1) diagonal, N(0,1/2) off-diagonal
  RademacherIsotropic,      ///< real symmetric, +-1 diagonal, +-1/sqrt(2) off-diagonal
};

/// Stable names: "mc-uniform", "mc-entry", "pauli", "gauss", "rademacher".
std::string_view design_kind_name(DesignKind kind);
/// Inverse of design_kind_name; throws std::invalid_argument for unknown names.
DesignKind parse_design_kind(std::string_view name);
/// True for kinds that draw from a finite list of basis elements.
bool samples_from_basis(DesignKind kind);

/// Real coordinates of A (length m^2), see the header comment for the order.
RVector hermitian_coordinates(const HermitianMatrix& a);
/// Inverse of hermitian_coordinates.
HermitianMatrix from_hermitian_coordinates(const RVector& coords, Index dim);

/// The m^2 elements of the matrix completion basis in coordinate order. The
/// coordinates of element j are the unit vector e_j.
std::vector<HermitianMatrix> basis_matrix_completion(Index m);

/// The 4^k tensor products W_{i_1} (x) ... (x) W_{i_k} with W_i = sigma_i / sqrt(2),
/// ordered with the leftmost factor most significant and the single-qubit
/// order (sigma_x, sigma_y, sigma_z, identity).
std::vector<HermitianMatrix> basis_pauli(int qubits);

/// Entry-sampling elements: e_i e_i^* for each i, then for i < j the matrix
/// (1/2)(E_ij + E_ji) + (i/2)(E_ij - E_ji). Only m(m+1)/2 elements, as written.
std::vector<HermitianMatrix> basis_entry_sampling(Index m);

/// An immutable design law. Copies share the cached basis.
class DesignDistribution {
 public:
  /// `dim` is m; PauliUniform requires m = 2^k with k >= 1.
  DesignDistribution(DesignKind kind, Index dim);

  static DesignDistribution pauli(int qubits);

  DesignKind kind() const { return kind_; }
  std::string_view name() const { return design_kind_name(kind_); }
  Index dim() const { return dim_; }
  /// k for PauliUniform, 0 otherwise.
  int qubits() const { return qubits_; }
  bool has_basis() const { return samples_from_basis(kind_); }

  /// Basis elements, their sampling weights and their coordinates as the
  /// columns of an m^2 x N matrix. Empty for isotropic kinds.
  const std::vector<HermitianMatrix>& basis() const { return cache_->basis; }
  const RVector& weights() const { return cache_->weights; }
  const RMatrix& basis_coordinates() const { return cache_->coords; }

  /// Index into basis() of a fresh draw; throws std::logic_error for isotropic kinds.
  Index sample_index(Rng& rng) const;
  HermitianMatrix sample(Rng& rng) const;

 private:
  struct Cache {
    std::vector<HermitianMatrix> basis;
    RVector weights;
    RVector cumulative;
    RMatrix coords;
  };
  DesignKind kind_;
  Index dim_;
  int qubits_ = 0;
  std::shared_ptr<const Cache> cache_;
};

/// Parse "name" with dimension m (for "pauli", m must be a power of two).
DesignDistribution make_design(std::string_view name, Index dim);

/// ||A||_{L2(Pi)} = (E <A, X>^2)^{1/2}, computed exactly for the law actually
/// sampled: a weighted sum over the support for basis kinds, the closed-form
/// second moment for the isotropic kinds. For real symmetric A this equals
/// m^{-1}||A||_2 for the uniform kinds and ||A||_2 for the isotropic ones.
double l2_pi_norm(const DesignDistribution& dist, const HermitianMatrix& a);

/// Gram matrix of the functionals <E_j, .> in L2(Pi) for an HS-orthonormal
/// family E_j, as a real symmetric PSD matrix.
struct GramOperator {
  std::vector<HermitianMatrix> basis;
  RMatrix matrix;
};

/// Gram matrix in hermitian_coordinates, i.e. for the completion basis.
RMatrix gram_matrix(const DesignDistribution& dist);
/// Gram operator for a caller-supplied HS-orthonormal family; throws
/// DomainError if the family is not orthonormal to 1e-10.
GramOperator gram_operator(const DesignDistribution& dist, const std::vector<HermitianMatrix>& basis);
GramOperator gram_operator(const DesignDistribution& dist);

/// a(W) = sup{ <W, U> : U Hermitian, tr U = 0, ||U||_{L2(Pi)} = 1 }.
/// For a singular Gram matrix the supremum is taken over the range of the
/// Gram matrix and is +infinity when W has a component along a traceless
/// direction of zero L2(Pi) norm. Throws DomainError when the identity itself
/// has zero L2(Pi) norm.
double alignment_coefficient(const DesignDistribution& dist, const HermitianMatrix& w);

enum class CoefficientMethod {
  automatic,        ///< closed form when the Gram matrix is a multiple of I, else power iteration
  power_iteration,  ///< 3 random restarts, <= 500 iterations, relative change 1e-10
  dense,            ///< full symmetric eigensolve
};

/// Lambda(L) = sup{ ||P A P||_2 : ||A||_{L2(Pi)} <= 1 }.
double lambda_coefficient(const DesignDistribution& dist, const SubspaceProjector& p,
                          CoefficientMethod method = CoefficientMethod::automatic, std::uint64_t seed = 1);

/// beta(L) = sup{ ||A - P' A P'||_{L2(Pi)} : ||A||_{L2(Pi)} <= 1 }, P' = I - P.
double beta_coefficient(const DesignDistribution& dist, const SubspaceProjector& p,
                        CoefficientMethod method = CoefficientMethod::automatic, std::uint64_t seed = 1);

/// Concentration constants of X. `exact` is true when every field was computed
/// by enumeration over a finite support; otherwise fields come from a
/// Monte-Carlo sample and the *_se fields carry batch-means standard errors.
struct DesignConstants {
  double sigma_X = 0;         ///< ||E (X - EX)^2||^{1/2}
  double sigma_XX = 0;        ///< ||E (X(x)X - E X(x)X)^2||^{1/2}
  double sigma_tilde = 0;     ///< sup_{|u|,|v|<=1} (E |<Xu, v>|^2)^{1/2}
  double U = 0;               ///< ess sup ||X|| (upper bound for Rademacher, +inf for Gaussian)
  double U_centered = 0;      ///< ess sup ||X - EX||
  double E_norm_sq = 0;       ///< E ||X||^2
  double mean_norm = 0;       ///< ||E X||
  double max_diag_moment = 0; ///< max_k E <X e_k, e_k>^2
  double psi2_norm = 0;       ///< || ||X|| ||_{psi_2}
  double psi1_norm = 0;       ///< || ||X|| ||_{psi_1}
  bool exact = false;
  double sigma_X_se = 0;
  double sigma_XX_se = 0;
  double E_norm_sq_se = 0;
};

/// `draws` and `seed` are used only for the isotropic kinds.
DesignConstants design_constants(const DesignDistribution& dist, int draws = 10000, std::uint64_t seed = 1);

/// inf{ C > 0 : mean(exp((|x|/C)^alpha) - 1) <= 1 } over a sample, by bisection.
/// Returns 0 for an all-zero sample.
double empirical_psi_norm(const std::vector<double>& sample, double alpha);

}  // namespace dmest
