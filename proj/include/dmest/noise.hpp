#pragma once

// Noise laws and simulation of the linear measurement process
// Y_j = tr(rho X_j) + xi_j.

#include "dmest/designs.hpp"
#include "dmest/states.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dmest {

enum class NoiseKind { Gaussian, BoundedUniform, TwoPoint };

/// Stable names: "gaussian", "uniform", "two-point".
std::string_view noise_kind_name(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view name);

/// Mean-zero noise. `scale` is sigma for Gaussian (0 gives noiseless data) and
/// the half-width c for the bounded kinds.
class NoiseModel {
 public:
  NoiseModel(NoiseKind kind, double scale);
  static NoiseModel gaussian(double sigma) { return {NoiseKind::Gaussian, sigma}; }
  static NoiseModel bounded_uniform(double c) { return {NoiseKind::BoundedUniform, c}; }
  static NoiseModel two_point(double c) { return {NoiseKind::TwoPoint, c}; }

  NoiseKind kind() const { return kind_; }
  double scale() const { return scale_; }
  double variance() const;
  double sample(Rng& rng) const;
  /// e.g. "gaussian(0.1)".
  std::string describe() const;

 private:
  NoiseKind kind_;
  double scale_;
};

struct NoiseConstants {
  double sigma_xi;    ///< standard deviation
  double c_xi_bound;  ///< almost-sure bound on |xi| (+inf for Gaussian with sigma > 0)
  double psi1;        ///< inf{C : E exp(|xi|/C) <= 2}
  double psi2;        ///< inf{C : E exp(xi^2/C^2) <= 2}
  double c_xi_log;  ///< psi2 * max(log(psi2 / sigma_xi), 1)
};

NoiseConstants noise_constants(const NoiseModel& noise);

struct DatasetMeta {
  std::string design;    ///< design kind name
  Index dim = 0;
  std::string noise;     ///< NoiseModel::describe()
  std::uint64_t design_seed = 0;
  std::uint64_t noise_seed = 0;
  std::string state_id;
};

/// Observations (X_j, Y_j). design_indices[j] is the basis index of X_j for
/// basis designs and -1 otherwise.
struct Dataset {
  std::vector<HermitianMatrix> designs;
  std::vector<double> responses;
  std::vector<Index> design_indices;
  DatasetMeta meta;

  Index size() const { return static_cast<Index>(responses.size()); }
  Index dim() const { return designs.empty() ? 0 : designs.front().dim(); }
  /// Throws DimensionError unless sizes agree, n >= 1 and all dims match.
  void validate() const;
};

/// Designs and noise come from two independent streams seeded by the first
/// two outputs of `rng`, so the designs alone can be replayed from
/// meta.design_seed.
Dataset simulate_measurements(const DensityMatrix& rho, const DesignDistribution& dist, const NoiseModel& noise,
                              Index n, Rng& rng, std::string state_id = {});

/// The n designs (and basis indices) drawn from a design stream seed.
void draw_designs(const DesignDistribution& dist, Index n, std::uint64_t design_seed, std::vector<HermitianMatrix>& designs,
                  std::vector<Index>& indices);

}  // namespace dmest
