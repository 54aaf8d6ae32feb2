#include "dmest/noise.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace dmest {

namespace {

/// Root of an increasing function on [lo, hi] by bisection.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// int_0^1 exp(y^2 u^2) du via its power series.
double mean_exp_square_uniform(double y) {
  const double y2 = y * y;
  double term = 1.0, acc = 1.0;
  for (int k = 1; k < 400; ++k) {
    term *= y2 / k;
    const double add = term / (2.0 * k + 1.0);
    acc += add;
    if (add < 1e-17 * acc) break;
  }
  return acc;
}

}  // namespace

std::string_view noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::BoundedUniform: return "uniform";
    case NoiseKind::TwoPoint: return "two-point";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view name) {
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "uniform") return NoiseKind::BoundedUniform;
  if (name == "two-point") return NoiseKind::TwoPoint;
  throw std::invalid_argument(fmt::format("unknown noise kind '{}' (expected gaussian, uniform or two-point)", name));
}

NoiseModel::NoiseModel(NoiseKind kind, double scale) : kind_(kind), scale_(scale) {
  const bool ok = kind == NoiseKind::Gaussian ? scale >= 0.0 : scale > 0.0;
  if (!ok || !std::isfinite(scale))
    throw DomainError(fmt::format("NoiseModel: invalid scale {} for {} noise", scale, noise_kind_name(kind)));
}

double NoiseModel::variance() const {
  switch (kind_) {
    case NoiseKind::Gaussian:
    case NoiseKind::TwoPoint: return scale_ * scale_;
    case NoiseKind::BoundedUniform: return scale_ * scale_ / 3.0;
  }
  return 0.0;
}

double NoiseModel::sample(Rng& rng) const {
  switch (kind_) {
    case NoiseKind::Gaussian: return scale_ * std::normal_distribution<double>()(rng);
    case NoiseKind::BoundedUniform: return std::uniform_real_distribution<double>(-scale_, scale_)(rng);
    case NoiseKind::TwoPoint: return (rng() >> 63) ? scale_ : -scale_;
  }
  return 0.0;
}

std::string NoiseModel::describe() const { return fmt::format("{}({:.17g})", noise_kind_name(kind_), scale_); }

NoiseConstants noise_constants(const NoiseModel& noise) {
  const double s = noise.scale();
  NoiseConstants out{};
  out.sigma_xi = std::sqrt(noise.variance());
  if (s == 0.0) return out;
  switch (noise.kind()) {
    case NoiseKind::Gaussian: {
      out.c_xi_bound = kInfinity;
      out.psi2 = s * std::sqrt(8.0 / 3.0);
      // E exp(|xi|/C) = 2 exp(r^2/2) Phi(r) with r = sigma / C.
      const double r = bisect_increasing([](double x) { return std::exp(0.5 * x * x) * std_normal_cdf(x); }, 1.0, 0.0, 2.0);
      out.psi1 = s / r;
      break;
    }
    case NoiseKind::BoundedUniform: {
      out.c_xi_bound = s;
      // E exp(|xi|/C) = (e^y - 1)/y and E exp(xi^2/C^2) = int_0^1 e^{y^2 u^2} du, y = c / C.
      const double y1 = bisect_increasing([](double y) { return std::expm1(y) / y; }, 2.0, 1e-9, 10.0);
      const double y2 = bisect_increasing(mean_exp_square_uniform, 2.0, 1e-9, 10.0);
      out.psi1 = s / y1;
      out.psi2 = s / y2;
      break;
    }
    case NoiseKind::TwoPoint:
      out.c_xi_bound = s;
      out.psi1 = s / std::log(2.0);
      out.psi2 = s / std::sqrt(std::log(2.0));
      break;
  }
  out.c_xi_log = out.psi2 * std::max(std::log(out.psi2 / out.sigma_xi), 1.0);
  return out;
}

void Dataset::validate() const {
  if (responses.empty()) throw DimensionError("Dataset: no observations");
  if (designs.size() != responses.size())
    throw DimensionError(fmt::format("Dataset: {} designs but {} responses", designs.size(), responses.size()));
  if (!design_indices.empty() && design_indices.size() != responses.size())
    throw DimensionError("Dataset: design index list has the wrong length");
  const Index m = designs.front().dim();
  for (const auto& x : designs)
    if (x.dim() != m) throw DimensionError(fmt::format("Dataset: mixed design dimensions {} and {}", m, x.dim()));
}

void draw_designs(const DesignDistribution& dist, Index n, std::uint64_t design_seed, std::vector<HermitianMatrix>& designs,
                  std::vector<Index>& indices) {
  Rng rng(design_seed);
  designs.clear();
  indices.clear();
  designs.reserve(n);
  indices.reserve(n);
  for (Index j = 0; j < n; ++j) {
    if (dist.has_basis()) {
      const Index k = dist.sample_index(rng);
      designs.push_back(dist.basis()[k]);
      indices.push_back(k);
    } else {
      designs.push_back(dist.sample(rng));
      indices.push_back(-1);
    }
  }
}

Dataset simulate_measurements(const DensityMatrix& rho, const DesignDistribution& dist, const NoiseModel& noise,
                              Index n, Rng& rng, std::string state_id) {
  if (rho.dim() != dist.dim())
    throw DimensionError(fmt::format("simulate_measurements: state dimension {} differs from design dimension {}",
                                     rho.dim(), dist.dim()));
  if (n < 1) throw DimensionError(fmt::format("simulate_measurements: n must be >= 1, got {}", n));
  Dataset data;
  data.meta.design = std::string(dist.name());
  data.meta.dim = dist.dim();
  data.meta.noise = noise.describe();
  data.meta.design_seed = rng();
  data.meta.noise_seed = rng();
  data.meta.state_id = std::move(state_id);
  draw_designs(dist, n, data.meta.design_seed, data.designs, data.design_indices);

  Rng noise_rng(data.meta.noise_seed);
  data.responses.resize(n);
  for (Index j = 0; j < n; ++j) data.responses[j] = hs_inner(rho.matrix(), data.designs[j]) + noise.sample(noise_rng);
  return data;
}

}  // namespace dmest
