#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "fovstat/fov.hpp"
#include "fovstat/gaussian.hpp"
#include "fovstat/partition.hpp"

namespace fovstat {

/// Poisson RFS parameterized by its intensity (PHD). Weights need not sum to
/// one; their total is the global cardinality mean.
class PoissonRfs {
public:
  explicit PoissonRfs(GaussianMixture intensity);

  const GaussianMixture& intensity() const { return intensity_; }
  double mean_cardinality() const { return mean_cardinality_; }

private:
  GaussianMixture intensity_;
  double mean_cardinality_;
};

/// IID cluster RFS: a finite cardinality pmf plus one shared normalized
/// spatial density. Infinite-support pmfs must be truncated by the caller.
class IidcRfs {
public:
  IidcRfs(std::vector<double> cardinality, GaussianMixture spatial);

  const std::vector<double>& cardinality() const { return cardinality_; }
  const GaussianMixture& spatial() const { return spatial_; }
  int max_cardinality() const { return static_cast<int>(cardinality_.size()) - 1; }

private:
  std::vector<double> cardinality_;
  GaussianMixture spatial_;
};

struct BernoulliComponent {
  double existence = 0.0;    // r in [0, 1)
  GaussianMixture density;   // normalized
};

/// Multi-Bernoulli RFS. Existence probabilities equal to one are rejected
/// (several expressions divide by 1 - r); pass 1 - 1e-9 instead.
class MultiBernoulli {
public:
  explicit MultiBernoulli(std::vector<BernoulliComponent> components);

  const std::vector<BernoulliComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  int state_dim() const { return state_dim_; }
  int position_dim() const { return position_dim_; }

private:
  std::vector<BernoulliComponent> components_;
  int state_dim_;
  int position_dim_;
};

struct GlmbComponent {
  double weight = 0.0;
  std::vector<int> labels;                 // distinct within the component
  std::vector<GaussianMixture> densities;  // one normalized density per label
};

/// GLMB distribution with the hypothesis set flattened to an explicit
/// component list (weight, label set, per-label densities).
class GlmbDistribution {
public:
  explicit GlmbDistribution(std::vector<GlmbComponent> components);

  const std::vector<GlmbComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

private:
  std::vector<GlmbComponent> components_;
};

using RfsModel = std::variant<PoissonRfs, IidcRfs, MultiBernoulli, GlmbDistribution>;

// ---------------------------------------------------------------------------
// FoV mass <1_S, p>
// ---------------------------------------------------------------------------

/// Estimates the mass by refining the mixture against the FoV boundary and
/// summing the weights of the mean-inside partition.
struct PartitionWeightsMethod {
  SplitConfig config;
  std::shared_ptr<const SplitLibrary> library;
};

/// Seeded Monte Carlo integration over the position marginal; deterministic
/// given the seed regardless of evaluation order.
struct MonteCarloMethod {
  int samples = 100000;
  std::uint64_t seed = 0;
};

/// Product of univariate normal CDF differences; requires an axis-aligned box
/// FoV and diagonal position-marginal covariances.
struct ExactBoxDiagonalMethod {};

using FovMassMethod =
    std::variant<PartitionWeightsMethod, MonteCarloMethod, ExactBoxDiagonalMethod>;

/// Derives the per-component variant of a method: Monte Carlo seeds are mixed
/// with the component index so each component draws an independent stream;
/// other methods pass through unchanged.
FovMassMethod per_component_method(const FovMassMethod& method, std::uint64_t index);

/// <1_S, p> for a normalized density p. Result clamped to [0, 1].
double fov_mass(const GaussianMixture& p, const FieldOfView& fov, const FovMassMethod& method);

/// Position-marginal samples used by the Monte Carlo mass method, one sample
/// per column. Sample k is a pure function of (seed, k).
Eigen::MatrixXd sample_positions(const GaussianMixture& p, int count, std::uint64_t seed);

/// Intensity of a multi-Bernoulli process: each component's density weighted
/// by its existence probability. Total weight is the sum of existences.
GaussianMixture phd_of_mb(const MultiBernoulli& mb);

/// Random SPD covariance recipe for scenario sampling: eigenvalues uniform in
/// [eigenvalue_min, eigenvalue_max] combined with a random rotation.
struct CovarianceSpec {
  double eigenvalue_min = 0.005;
  double eigenvalue_max = 0.05;
};

/// Draws a reproducible multi-Bernoulli scenario: `count` single-Gaussian
/// position-space components with means uniform in the ROI, existence uniform
/// in `existence_range` (values equal to one clamped to 1 - 1e-9), and random
/// SPD covariances per `spec`. Fully determined by the seed.
MultiBernoulli sample_mb_scenario(int count, const AxisAlignedBox& roi,
                                  std::pair<double, double> existence_range,
                                  const CovarianceSpec& spec, std::uint64_t seed);

}  // namespace fovstat
