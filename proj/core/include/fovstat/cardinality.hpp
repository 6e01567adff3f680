#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fovstat/fov.hpp"
#include "fovstat/rfs_models.hpp"

namespace fovstat {

/// Finite pmf over the number of objects inside a FoV.
struct CardinalityPmf {
  std::vector<double> probabilities;
  std::string method;
  /// Truncation bound used while building the pmf (e.g. the Poisson series
  /// cutoff); -1 when no truncation was involved.
  int truncation = -1;

  int max_count() const { return static_cast<int>(probabilities.size()) - 1; }
};

struct PmfMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of a finite pmf.
PmfMoments pmf_moments(const CardinalityPmf& pmf);

/// Probability the FoV is empty, rho_S(0).
double void_probability(const CardinalityPmf& pmf);

/// Poisson-binomial pmf of independent non-identical Bernoulli trials via the
/// O(M * n) convolution recurrence. The computational core of the MB and GLMB
/// FoV cardinality results.
CardinalityPmf poisson_binomial_pmf(const std::vector<double>& success_probs);

// ---------------------------------------------------------------------------
// Family pmfs. The optional detection_prob thins the FoV mass (q -> p_d q),
// realizing detection-count prediction for constant detection probability.
// ---------------------------------------------------------------------------

/// Poisson FoV cardinality. Internally evaluates both the truncated
/// double-series form and its Poisson collapse, asserts they agree to 1e-10,
/// and returns the collapsed form.
CardinalityPmf poisson_fov_pmf(const PoissonRfs& model, const FieldOfView& fov,
                               const FovMassMethod& mass_method, double detection_prob = 1.0);

/// Audit path: the truncated double-series form of the Poisson FoV
/// cardinality, kept independent of the collapsed production path.
CardinalityPmf poisson_fov_pmf_truncated(const PoissonRfs& model, const FieldOfView& fov,
                                         const FovMassMethod& mass_method,
                                         double detection_prob = 1.0);

/// IIDC FoV cardinality: binomial thinning mixed over the cardinality pmf.
/// Binomial terms switch to log space above m = 50.
CardinalityPmf iidc_fov_pmf(const IidcRfs& model, const FieldOfView& fov,
                            const FovMassMethod& mass_method, double detection_prob = 1.0);

/// Per-component FoV masses q_i = <1_S, p_i> of a multi-Bernoulli model.
/// Monte Carlo mass methods draw an independent substream per component.
std::vector<double> mb_fov_masses(const MultiBernoulli& model, const FieldOfView& fov,
                                  const FovMassMethod& mass_method);

/// Exhaustive evaluation over all ternary index partitions (inside / outside /
/// nonexistent) of {1..M}. Exponential in M; limited to M <= 14. Serves as the
/// correctness oracle for the production DP path.
CardinalityPmf mb_fov_pmf_exact(const MultiBernoulli& model, const FieldOfView& fov,
                                const FovMassMethod& mass_method, double detection_prob = 1.0);

/// Production path: Poisson-binomial recurrence over the probabilities
/// r_S_i = r_i * q_i of each object existing inside the FoV.
CardinalityPmf mb_fov_pmf_dp(const MultiBernoulli& model, const FieldOfView& fov,
                             const FovMassMethod& mass_method, double detection_prob = 1.0);

/// Stochastic estimate: trial_count rounds of per-object Bernoulli draws with
/// success r_S_i, tallied and normalized. Deterministic given the seed.
CardinalityPmf mb_fov_pmf_mc(const MultiBernoulli& model, const FieldOfView& fov,
                             const FovMassMethod& mass_method, int trial_count,
                             std::uint64_t seed, double detection_prob = 1.0);

/// GLMB FoV cardinality: per hypothesis, a Poisson-binomial pmf over the
/// per-label masses, mixed by the hypothesis weights.
CardinalityPmf glmb_fov_pmf(const GlmbDistribution& model, const FieldOfView& fov,
                            const FovMassMethod& mass_method, double detection_prob = 1.0);

struct PmfOptions;

/// MB FoV cardinality assembled from precomputed per-component masses. The
/// mb_fov_pmf_* entry points are thin wrappers over this; callers that cache
/// masses across many FoV placements get bit-identical results.
CardinalityPmf mb_pmf_from_masses(const MultiBernoulli& model,
                                  const std::vector<double>& masses,
                                  const PmfOptions& options);

// ---------------------------------------------------------------------------
// Family-generic dispatch
// ---------------------------------------------------------------------------

struct PmfOptions {
  enum class Algorithm {
    production,  // collapsed Poisson / IIDC / MB dp / GLMB
    exact,       // MB exhaustive enumeration; other families as production
    mc           // MB stochastic estimate; other families as production
  };
  Algorithm algorithm = Algorithm::production;
  int mc_trials = 1000000;
  std::uint64_t mc_seed = 0;
  double detection_prob = 1.0;
};

/// FoV cardinality pmf of any supported model family.
CardinalityPmf fov_cardinality_pmf(const RfsModel& model, const FieldOfView& fov,
                                   const FovMassMethod& mass_method,
                                   const PmfOptions& options = {});

/// Predicted count of object-originated detections inside the FoV for a
/// constant detection probability: the family computation with q replaced by
/// detection_prob * q.
CardinalityPmf detection_count_pmf(const RfsModel& model, const FieldOfView& fov,
                                   double detection_prob, const FovMassMethod& mass_method);

}  // namespace fovstat
