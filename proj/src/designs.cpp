#include "dmest/designs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmest {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2 = 0.7071067811865476;

struct KindName {
  DesignKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 5> kKindNames{{
    {DesignKind::MatrixCompletionUniform, "mc-uniform"},
    {DesignKind::MatrixCompletionEntry, "mc-entry"},
    {DesignKind::PauliUniform, "pauli"},
    {DesignKind::GaussianIsotropic, "gauss"},
    {DesignKind::RademacherIsotropic, "rademacher"},
}};

/// Number of symmetric (or antisymmetric) coordinates.
Index pair_count(Index m) { return m * (m - 1) / 2; }

int log2_exact(Index m) {
  int k = 0;
  while ((Index{1} << k) < m) ++k;
  return (Index{1} << k) == m ? k : -1;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

double top_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double top_eigenvalue(const RMatrix& h) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double weighted_psi_norm(const std::vector<double>& x, const std::vector<double>& w, double alpha) {
  double top = 0.0;
  for (double v : x) top = std::max(top, std::abs(v));
  if (top == 0.0) return 0.0;
  auto excess = [&](double c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * std::expm1(std::pow(std::abs(x[i]) / c, alpha));
    return acc;
  };
  // At C = top / (log 2)^{1/alpha} every term is at most 1, so the weighted mean is <= 1.
  double hi = top / std::pow(std::log(2.0), 1.0 / alpha);
  double lo = hi;
  while (excess(lo) <= 1.0) lo *= 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

/// Columns are hermitian_coordinates(P E_j P) over the completion basis.
RMatrix compression_matrix(const HermitianMatrix& p) {
  const Index m = p.dim();
  const auto basis = basis_matrix_completion(m);
  RMatrix out(m * m, m * m);
  for (Index j = 0; j < m * m; ++j) out.col(j) = hermitian_coordinates(basis[j].congruence(p.mat()));
  return out;
}

/// Range/null split of a PSD Gram matrix.
struct GramSplit {
  RMatrix range;     ///< orthonormal eigenvectors with eigenvalue > tol
  RVector values;    ///< matching eigenvalues
  RMatrix null;      ///< orthonormal eigenvectors with eigenvalue <= tol
};

GramSplit split_gram(const RMatrix& gram) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(gram);
  const RVector& lam = es.eigenvalues();
  const double tol = 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  Index nnull = 0;
  while (nnull < lam.size() && lam(nnull) <= tol) ++nnull;
  GramSplit s;
  s.null = es.eigenvectors().leftCols(nnull);
  s.range = es.eigenvectors().rightCols(lam.size() - nnull);
  s.values = lam.tail(lam.size() - nnull);
  return s;
}

double power_iteration_top(const RMatrix& a, std::uint64_t seed) {
  const Index d = a.rows();
  if (d == 0) return 0.0;
  double best = 0.0;
  for (std::uint64_t restart = 0; restart < 3; ++restart) {
    Rng rng(derive_seed(seed, {restart}));
    std::normal_distribution<double> gauss;
    RVector x(d);
    for (Index i = 0; i < d; ++i) x(i) = gauss(rng);
    x.normalize();
    double lam = x.dot(a * x);
    for (int it = 0; it < 500; ++it) {
      RVector y = a * x;
      const double ny = y.norm();
      if (ny == 0.0) {
        lam = 0.0;
        break;
      }
      x = y / ny;
      const double next = x.dot(a * x);
      const bool done = std::abs(next - lam) <= 1e-10 * std::abs(next);
      lam = next;
      if (done) break;
    }
    best = std::max(best, lam);
  }
  return best;
}

/// sup_a (a^T T a) / (a^T K a) for PSD T and K, +inf when T is nonzero on null(K).
double generalized_top(const RMatrix& target, const RMatrix& gram, CoefficientMethod method, std::uint64_t seed) {
  const GramSplit s = split_gram(gram);
  if (s.null.cols() > 0) {
    const double leak = (s.null.transpose() * target * s.null).cwiseAbs().maxCoeff();
    if (leak > 1e-10 * std::max(1.0, target.cwiseAbs().maxCoeff())) return kInfinity;
  }
  const RMatrix r = s.range * s.values.cwiseSqrt().cwiseInverse().asDiagonal();
  RMatrix reduced = r.transpose() * target * r;
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  const double top = method == CoefficientMethod::dense ? top_eigenvalue(reduced) : power_iteration_top(reduced, seed);
  return std::max(top, 0.0);
}

bool gram_is_scaled_identity(DesignKind kind) {
  return kind == DesignKind::MatrixCompletionUniform || kind == DesignKind::PauliUniform;
}

}  // namespace

std::string_view design_kind_name(DesignKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "?";
}

DesignKind parse_design_kind(std::string_view name) {
  for (const auto& k : kKindNames)
    if (k.name == name) return k.kind;
  throw std::invalid_argument(
      fmt::format("unknown design kind '{}' (expected mc-uniform, mc-entry, pauli, gauss or rademacher)", name));
}

bool samples_from_basis(DesignKind kind) {
  return kind == DesignKind::MatrixCompletionUniform || kind == DesignKind::MatrixCompletionEntry ||
         kind == DesignKind::PauliUniform;
}

RVector hermitian_coordinates(const HermitianMatrix& a) {
  const Index m = a.dim(), np = pair_count(m);
  RVector c(m * m);
  for (Index i = 0; i < m; ++i) c(i) = a(i, i).real();
  Index p = 0;
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j, ++p) {
      c(m + p) = kSqrt2 * a(i, j).real();
      c(m + np + p) = kSqrt2 * a(i, j).imag();
    }
  return c;
}

HermitianMatrix from_hermitian_coordinates(const RVector& coords, Index dim) {
  if (coords.size() != dim * dim)
    throw DimensionError(fmt::format("from_hermitian_coordinates: expected {} coordinates, got {}", dim * dim,
                                     coords.size()));
  const Index np = pair_count(dim);
  CMatrix a = CMatrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) a(i, i) = coords(i);
  Index p = 0;
  for (Index i = 0; i < dim; ++i)
    for (Index j = i + 1; j < dim; ++j, ++p) {
      a(i, j) = Complex(coords(dim + p), coords(dim + np + p)) * kInvSqrt2;
      a(j, i) = std::conj(a(i, j));
    }
  return HermitianMatrix(std::move(a));
}

std::vector<HermitianMatrix> basis_matrix_completion(Index m) {
  if (m < 1) throw DimensionError(fmt::format("basis_matrix_completion: m must be >= 1, got {}", m));
  std::vector<HermitianMatrix> out;
  out.reserve(m * m);
  for (Index j = 0; j < m * m; ++j) out.push_back(from_hermitian_coordinates(RVector::Unit(m * m, j), m));
  return out;
}

std::vector<HermitianMatrix> basis_pauli(int qubits) {
  if (qubits < 1 || qubits > 10) throw DimensionError(fmt::format("basis_pauli: qubit count {} outside [1, 10]", qubits));
  const Complex I(0.0, 1.0);
  std::array<CMatrix, 4> w;
  w[0] = CMatrix{{0.0, 1.0}, {1.0, 0.0}};
  w[1] = CMatrix{{0.0, -I}, {I, 0.0}};
  w[2] = CMatrix{{1.0, 0.0}, {0.0, -1.0}};
  w[3] = CMatrix::Identity(2, 2);
  for (auto& x : w) x *= kInvSqrt2;

  std::vector<CMatrix> cur(w.begin(), w.end());
  for (int q = 1; q < qubits; ++q) {
    std::vector<CMatrix> next;
    next.reserve(cur.size() * 4);
    for (const auto& a : cur)
      for (const auto& b : w) next.push_back(kron(a, b));
    cur = std::move(next);
  }
  std::vector<HermitianMatrix> out;
  out.reserve(cur.size());
  for (auto& c : cur) out.emplace_back(std::move(c));
  return out;
}

std::vector<HermitianMatrix> basis_entry_sampling(Index m) {
  if (m < 1) throw DimensionError(fmt::format("basis_entry_sampling: m must be >= 1, got {}", m));
  std::vector<HermitianMatrix> out;
  for (Index i = 0; i < m; ++i) {
    CMatrix e = CMatrix::Zero(m, m);
    e(i, i) = 1.0;
    out.emplace_back(std::move(e));
  }
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      CMatrix f = CMatrix::Zero(m, m);
      f(i, j) = Complex(0.5, 0.5);
      f(j, i) = Complex(0.5, -0.5);
      out.emplace_back(std::move(f));
    }
  return out;
}

DesignDistribution::DesignDistribution(DesignKind kind, Index dim) : kind_(kind), dim_(dim) {
  if (dim < 1) throw DimensionError(fmt::format("DesignDistribution: m must be >= 1, got {}", dim));
  auto cache = std::make_shared<Cache>();
  switch (kind) {
    case DesignKind::MatrixCompletionUniform:
      cache->basis = basis_matrix_completion(dim);
      cache->weights = RVector::Constant(dim * dim, 1.0 / static_cast<double>(dim * dim));
      break;
    case DesignKind::PauliUniform:
      qubits_ = log2_exact(dim);
      if (qubits_ < 1) throw DomainError(fmt::format("pauli design needs m = 2^k with k >= 1, got m = {}", dim));
      cache->basis = basis_pauli(qubits_);
      cache->weights = RVector::Constant(dim * dim, 1.0 / static_cast<double>(dim * dim));
      break;
    case DesignKind::MatrixCompletionEntry: {
      cache->basis = basis_entry_sampling(dim);
      const double m2 = static_cast<double>(dim * dim);
      cache->weights = RVector::Constant(static_cast<Index>(cache->basis.size()), 2.0 / m2);
      cache->weights.head(dim).setConstant(1.0 / m2);
      break;
    }
    case DesignKind::GaussianIsotropic:
    case DesignKind::RademacherIsotropic:
      break;
  }
  if (!cache->basis.empty()) {
    const Index n = static_cast<Index>(cache->basis.size());
    cache->coords.resize(dim * dim, n);
    for (Index j = 0; j < n; ++j) cache->coords.col(j) = hermitian_coordinates(cache->basis[j]);
    cache->cumulative.resize(n);
    std::partial_sum(cache->weights.begin(), cache->weights.end(), cache->cumulative.begin());
  }
  cache_ = std::move(cache);
}

DesignDistribution DesignDistribution::pauli(int qubits) {
  if (qubits < 1 || qubits > 10) throw DimensionError(fmt::format("pauli design: qubit count {} outside [1, 10]", qubits));
  return DesignDistribution(DesignKind::PauliUniform, Index{1} << qubits);
}

DesignDistribution make_design(std::string_view name, Index dim) { return DesignDistribution(parse_design_kind(name), dim); }

Index DesignDistribution::sample_index(Rng& rng) const {
  if (!has_basis())
    throw std::logic_error(fmt::format("sample_index: design '{}' has no finite basis", name()));
  const Index n = static_cast<Index>(cache_->basis.size());
  if (kind_ != DesignKind::MatrixCompletionEntry) return std::uniform_int_distribution<Index>(0, n - 1)(rng);
  const double u = std::generate_canonical<double, 53>(rng) * cache_->cumulative(n - 1);
  const auto* begin = cache_->cumulative.data();
  const Index k = std::upper_bound(begin, begin + n, u) - begin;
  return std::min(k, n - 1);
}

HermitianMatrix DesignDistribution::sample(Rng& rng) const {
  if (has_basis()) return cache_->basis[sample_index(rng)];
  CMatrix x = CMatrix::Zero(dim_, dim_);
  if (kind_ == DesignKind::GaussianIsotropic) {
    std::normal_distribution<double> gauss;
    for (Index i = 0; i < dim_; ++i)
      for (Index j = i; j < dim_; ++j) x(i, j) = x(j, i) = gauss(rng) * (i == j ? 1.0 : kInvSqrt2);
  } else {
    for (Index i = 0; i < dim_; ++i)
      for (Index j = i; j < dim_; ++j) {
        const double sign = (rng() >> 63) ? 1.0 : -1.0;
        x(i, j) = x(j, i) = sign * (i == j ? 1.0 : kInvSqrt2);
      }
  }
  return HermitianMatrix(std::move(x));
}

double l2_pi_norm(const DesignDistribution& dist, const HermitianMatrix& a) {
  if (a.dim() != dist.dim())
    throw DimensionError(fmt::format("l2_pi_norm: matrix dimension {} differs from design dimension {}", a.dim(),
                                     dist.dim()));
  const RVector c = hermitian_coordinates(a);
  if (dist.has_basis()) {
    const RVector proj = dist.basis_coordinates().transpose() * c;
    return std::sqrt(dist.weights().dot(proj.cwiseAbs2()));
  }
  // Real symmetric isotropic designs see the diagonal and the real parts only.
  const Index m = a.dim();
  return c.head(m + pair_count(m)).norm();
}

RMatrix gram_matrix(const DesignDistribution& dist) {
  const Index m = dist.dim();
  if (dist.has_basis()) {
    const RMatrix& c = dist.basis_coordinates();
    RMatrix g = c * dist.weights().asDiagonal() * c.transpose();
    return 0.5 * (g + g.transpose());
  }
  RVector d = RVector::Zero(m * m);
  d.head(m + pair_count(m)).setOnes();
  return d.asDiagonal();
}

GramOperator gram_operator(const DesignDistribution& dist, const std::vector<HermitianMatrix>& basis) {
  const Index m = dist.dim();
  RMatrix b(m * m, static_cast<Index>(basis.size()));
  for (Index j = 0; j < b.cols(); ++j) {
    if (basis[j].dim() != m) throw DimensionError("gram_operator: basis element has the wrong dimension");
    b.col(j) = hermitian_coordinates(basis[j]);
  }
  const double dev = (b.transpose() * b - RMatrix::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10) throw DomainError(fmt::format("gram_operator: basis is not orthonormal (deviation {:.3e})", dev));
  RMatrix g = b.transpose() * gram_matrix(dist) * b;
  return {basis, 0.5 * (g + g.transpose())};
}

GramOperator gram_operator(const DesignDistribution& dist) {
  return {basis_matrix_completion(dist.dim()), gram_matrix(dist)};
}

double alignment_coefficient(const DesignDistribution& dist, const HermitianMatrix& w) {
  if (w.dim() != dist.dim()) throw DimensionError("alignment_coefficient: dimension mismatch");
  const Index m = dist.dim();
  const GramSplit s = split_gram(gram_matrix(dist));
  const RVector tau = hermitian_coordinates(HermitianMatrix::identity(m));
  const RVector wc = hermitian_coordinates(w);
  if (s.null.cols() > 0) {
    if ((s.null.transpose() * tau).norm() > 1e-10 * tau.norm())
      throw DomainError("alignment_coefficient: the identity has zero L2(Pi) norm under this design");
    // Null directions are traceless here, so any overlap makes the supremum unbounded.
    if ((s.null.transpose() * wc).norm() > 1e-10 * std::max(1.0, wc.norm())) return kInfinity;
  }
  const RVector inv = s.values.cwiseInverse();
  const RVector wr = s.range.transpose() * wc;
  const RVector tr = s.range.transpose() * tau;
  const double ww = wr.dot(inv.asDiagonal() * wr);
  const double wt = wr.dot(inv.asDiagonal() * tr);
  const double tt = tr.dot(inv.asDiagonal() * tr);
  return std::sqrt(std::max(ww - wt * wt / tt, 0.0));
}

double lambda_coefficient(const DesignDistribution& dist, const SubspaceProjector& p, CoefficientMethod method,
                          std::uint64_t seed) {
  if (p.dim_ambient() != dist.dim()) throw DimensionError("lambda_coefficient: dimension mismatch");
  if (p.rank() == 0) return 0.0;
  if (method == CoefficientMethod::automatic && gram_is_scaled_identity(dist.kind()))
    return static_cast<double>(dist.dim());
  const RMatrix c = compression_matrix(p.matrix());
  return std::sqrt(generalized_top(c.transpose() * c, gram_matrix(dist), method, seed));
}

double beta_coefficient(const DesignDistribution& dist, const SubspaceProjector& p, CoefficientMethod method,
                        std::uint64_t seed) {
  if (p.dim_ambient() != dist.dim()) throw DimensionError("beta_coefficient: dimension mismatch");
  if (p.rank() == 0) return 0.0;
  if (method == CoefficientMethod::automatic && gram_is_scaled_identity(dist.kind())) return 1.0;
  const Index m2 = dist.dim() * dist.dim();
  const RMatrix d = RMatrix::Identity(m2, m2) - compression_matrix(p.complement());
  const RMatrix k = gram_matrix(dist);
  return std::sqrt(generalized_top(d.transpose() * k * d, k, method, seed));
}

namespace {

/// sup over unit u, v of E |<X u, v>|^2 by alternating top-eigenvector updates,
/// given a routine returning E[X a a^* X] for a unit vector a.
template <class SecondMoment>
double alternating_sigma_tilde(Index m, SecondMoment&& moment, std::uint64_t seed, bool every_axis, int max_iter) {
  std::vector<CVector> starts;
  for (Index k = 0; k < (every_axis ? m : 1); ++k) starts.push_back(CVector::Unit(m, k));
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  for (int r = 0; r < 2; ++r) {
    CVector v(m);
    for (Index i = 0; i < m; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    starts.push_back(v.normalized());
  }
  double best = 0.0;
  for (CVector u : starts) {
    double val = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(moment(u));
      const double next = es.eigenvalues()(m - 1);
      u = es.eigenvectors().col(m - 1);
      const bool done = std::abs(next - val) <= 1e-12 * std::max(next, 1e-300);
      val = next;
      if (done) break;
    }
    best = std::max(best, val);
  }
  return std::sqrt(best);
}

DesignConstants exact_constants(const DesignDistribution& dist) {
  const Index m = dist.dim();
  const auto& basis = dist.basis();
  const RVector& w = dist.weights();
  const Index n = static_cast<Index>(basis.size());
  DesignConstants out;
  out.exact = true;

  CMatrix ex = CMatrix::Zero(m, m), ex2 = CMatrix::Zero(m, m);
  CMatrix exx = CMatrix::Zero(m * m, m * m), ex2x2 = CMatrix::Zero(m * m, m * m);
  std::vector<double> norms(n), wv(n);
  for (Index j = 0; j < n; ++j) {
    const CMatrix& e = basis[j].mat();
    const CMatrix e2 = e * e;
    ex += w(j) * e;
    ex2 += w(j) * e2;
    exx += w(j) * kron(e, e);
    ex2x2 += w(j) * kron(e2, e2);
    norms[j] = operator_norm(basis[j]);
    wv[j] = w(j);
    out.E_norm_sq += w(j) * norms[j] * norms[j];
  }
  const HermitianMatrix mean(ex);
  out.sigma_X = std::sqrt(std::max(top_eigenvalue(CMatrix(ex2 - ex * ex)), 0.0));
  out.sigma_XX = std::sqrt(std::max(top_eigenvalue(CMatrix(ex2x2 - exx * exx)), 0.0));
  out.mean_norm = operator_norm(mean);
  for (Index j = 0; j < n; ++j) {
    if (w(j) <= 0) continue;
    out.U = std::max(out.U, norms[j]);
    out.U_centered = std::max(out.U_centered, operator_norm(basis[j] - mean));
  }
  for (Index k = 0; k < m; ++k) {
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) acc += w(j) * std::pow(basis[j](k, k).real(), 2);
    out.max_diag_moment = std::max(out.max_diag_moment, acc);
  }
  out.sigma_tilde = alternating_sigma_tilde(
      m,
      [&](const CVector& a) {
        CMatrix acc = CMatrix::Zero(m, m);
        for (Index j = 0; j < n; ++j) {
          const CVector xa = basis[j].mat() * a;
          acc += w(j) * xa * xa.adjoint();
        }
        return acc;
      },
      7, true, 50);
  out.psi2_norm = weighted_psi_norm(norms, wv, 2.0);
  out.psi1_norm = weighted_psi_norm(norms, wv, 1.0);
  return out;
}

double batch_se(const std::vector<double>& v) {
  const double k = static_cast<double>(v.size());
  const double mu = std::accumulate(v.begin(), v.end(), 0.0) / k;
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / (k - 1.0) / k);
}

DesignConstants sampled_constants(const DesignDistribution& dist, int draws, std::uint64_t seed) {
  const Index m = dist.dim(), m2 = m * m;
  constexpr int kBatches = 20;
  if (draws < 2 * kBatches) throw std::invalid_argument("design_constants: need at least 40 draws");
  Rng rng(seed);
  std::vector<RMatrix> sample;
  sample.reserve(draws);
  std::vector<double> norms(draws);
  for (int d = 0; d < draws; ++d) sample.push_back(dist.sample(rng).mat().real());

  DesignConstants out;
  RMatrix ex2 = RMatrix::Zero(m, m), exx = RMatrix::Zero(m2, m2), ex2x2 = RMatrix::Zero(m2, m2);
  RMatrix bx2 = ex2, bxx = exx, bx2x2 = ex2x2;
  std::vector<double> sx_batch, sxx_batch, nsq_batch;
  double bnsq = 0.0;
  const int per_batch = draws / kBatches;
  int in_batch = 0;
  for (int d = 0; d < draws; ++d) {
    const RMatrix& x = sample[d];
    const RMatrix x2 = x * x;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(x, Eigen::EigenvaluesOnly);
    norms[d] = es.eigenvalues().cwiseAbs().maxCoeff();
    bx2 += x2;
    bnsq += norms[d] * norms[d];
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) {
        bxx.block(i * m, j * m, m, m) += x(i, j) * x;
        bx2x2.block(i * m, j * m, m, m) += x2(i, j) * x2;
      }
    if (++in_batch == per_batch && static_cast<int>(sx_batch.size()) < kBatches) {
      const double c = 1.0 / per_batch;
      const RMatrix mxx = c * bxx;
      sx_batch.push_back(std::sqrt(std::max(top_eigenvalue(RMatrix(c * bx2)), 0.0)));
      sxx_batch.push_back(std::sqrt(std::max(top_eigenvalue(RMatrix(c * bx2x2 - mxx * mxx)), 0.0)));
      nsq_batch.push_back(c * bnsq);
      ex2 += bx2;
      exx += bxx;
      ex2x2 += bx2x2;
      out.E_norm_sq += bnsq;
      bx2.setZero();
      bxx.setZero();
      bx2x2.setZero();
      bnsq = 0.0;
      in_batch = 0;
    }
  }
  ex2 += bx2;
  exx += bxx;
  ex2x2 += bx2x2;
  out.E_norm_sq += bnsq;
  const double inv = 1.0 / draws;
  ex2 *= inv;
  exx *= inv;
  ex2x2 *= inv;
  out.E_norm_sq *= inv;

  // E X = 0 exactly for both isotropic laws.
  out.sigma_X = std::sqrt(std::max(top_eigenvalue(ex2), 0.0));
  out.sigma_XX = std::sqrt(std::max(top_eigenvalue(RMatrix(ex2x2 - exx * exx)), 0.0));
  out.sigma_X_se = batch_se(sx_batch);
  out.sigma_XX_se = batch_se(sxx_batch);
  out.E_norm_sq_se = batch_se(nsq_batch);
  out.mean_norm = 0.0;
  out.max_diag_moment = 1.0;
  if (dist.kind() == DesignKind::GaussianIsotropic) {
    out.U = out.U_centered = kInfinity;
  } else {
    // ||X|| <= ||X||_2 = sqrt(m + m(m-1)/2).
    out.U = out.U_centered = std::sqrt(static_cast<double>(m + pair_count(m)));
  }
  out.sigma_tilde = alternating_sigma_tilde(
      m,
      [&](const CVector& a) {
        CMatrix acc = CMatrix::Zero(m, m);
        for (const RMatrix& x : sample) {
          const CVector xa = x.cast<Complex>() * a;
          acc += xa * xa.adjoint();
        }
        return CMatrix(acc * inv);
      },
      derive_seed(seed, {1}), false, 20);
  out.psi2_norm = empirical_psi_norm(norms, 2.0);
  out.psi1_norm = empirical_psi_norm(norms, 1.0);
  return out;
}

}  // namespace

DesignConstants design_constants(const DesignDistribution& dist, int draws, std::uint64_t seed) {
  return dist.has_basis() ? exact_constants(dist) : sampled_constants(dist, draws, seed);
}

double empirical_psi_norm(const std::vector<double>& sample, double alpha) {
  if (sample.empty()) throw std::invalid_argument("empirical_psi_norm: empty sample");
  if (!(alpha >= 1.0)) throw DomainError(fmt::format("empirical_psi_norm: alpha must be >= 1, got {}", alpha));
  const std::vector<double> w(sample.size(), 1.0 / static_cast<double>(sample.size()));
  return weighted_psi_norm(sample, w, alpha);
}

}  // namespace dmest
