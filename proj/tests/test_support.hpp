#pragma once

// Shared generators and independent oracles for the unit tests.

#include "dmest/hermitian.hpp"
#include "dmest/rng.hpp"
#include "dmest/states.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace dmest::testing {

inline CMatrix random_complex(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = Complex(g(rng), g(rng));
  return a;
}

/// (G + G^*) / 2 for a complex Ginibre G.
inline HermitianMatrix random_hermitian(Index dim, Rng& rng, double scale = 1.0) {
  const CMatrix g = random_complex(dim, dim, rng, scale);
  return HermitianMatrix(CMatrix(0.5 * (g + g.adjoint())));
}

/// Hermitian matrix with eigenvalues uniform in [lo, hi] in a Haar basis.
inline HermitianMatrix random_hermitian_spectrum(Index dim, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  RVector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = u(rng);
  return HermitianMatrix::from_spectrum(v, random_unitary(dim, rng));
}

/// Full-rank state with eigenvalues bounded away from zero.
inline DensityMatrix random_full_rank(Index dim, Rng& rng, double floor = 0.02) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RVector p(dim);
  for (Index i = 0; i < dim; ++i) p[i] = floor + u(rng);
  p /= p.sum();
  return DensityMatrix::from_probabilities(p, random_unitary(dim, rng));
}

inline RVector random_probabilities(Index dim, Rng& rng, double floor = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RVector p(dim);
  for (Index i = 0; i < dim; ++i) p[i] = floor + u(rng);
  return p / p.sum();
}

inline DensityMatrix diagonal_state(const RVector& p) {
  return DensityMatrix(HermitianMatrix::diagonal(p));
}

/// Eigenvalues of a Hermitian matrix, descending, by cyclic Jacobi rotations
/// on the real symmetric 2m x 2m embedding [[Re, -Im], [Im, Re]] (each
/// eigenvalue appears twice there; every second one is kept).
inline std::vector<double> jacobi_eigenvalues(const HermitianMatrix& a) {
  const Index m = a.dim(), n = 2 * m;
  std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) {
      const double re = a(i, j).real(), im = a(i, j).imag();
      s[i][j] = re;
      s[i + m][j + m] = re;
      s[i][j + m] = -im;
      s[i + m][j] = im;
    }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += s[p][q] * s[p][q];
    if (off < 1e-30) break;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(s[p][q]) < 1e-300) continue;
        const double theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
        for (Index k = 0; k < n; ++k) {
          const double skp = s[k][p], skq = s[k][q];
          s[k][p] = c * skp - sn * skq;
          s[k][q] = sn * skp + c * skq;
        }
        for (Index k = 0; k < n; ++k) {
          const double spk = s[p][k], sqk = s[q][k];
          s[p][k] = c * spk - sn * sqk;
          s[q][k] = sn * spk + c * sqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (Index i = 0; i < n; ++i) ev[i] = s[i][i];
  std::sort(ev.begin(), ev.end(), std::greater<>());
  std::vector<double> out;
  for (Index i = 0; i < n; i += 2) out.push_back(ev[i]);
  return out;
}

inline double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Standard error of the mean.
inline double std_error(const std::vector<double>& x) {
  const double mu = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace dmest::testing
