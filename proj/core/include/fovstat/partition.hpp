#pragma once

#include <vector>

#include "fovstat/fov.hpp"
#include "fovstat/gaussian.hpp"
#include "fovstat/split_library.hpp"

namespace fovstat {

/// Settings for recursive FoV-driven refinement.
struct SplitConfig {
  /// Components lighter than this are never split.
  double min_weight = 0.01;
  /// Number of children per split (library R).
  int split_count = 3;
  /// Library regularizer selecting the split entry.
  double lambda = 1e-3;
  /// Collocation grid half-width in standard deviations.
  double grid_halfwidth = 3.0;
  /// Collocation points per axis.
  int grid_points = 7;
  /// Recursion cap; refinement returns flagged instead of throwing.
  int max_depth = 10;
};

struct SplitDiagnostics {
  int splits_performed = 0;
  int depth_reached = 0;
  bool depth_capped = false;
  /// True when the requested lambda was not in the library and the nearest
  /// stored entry was used instead.
  bool lambda_fallback = false;
};

struct PartitionDiagnostics {
  int splits_performed = 0;
  int depth_reached = 0;
  bool depth_capped = false;
  double mass_inside = 0.0;
  double mass_outside = 0.0;
};

/// Result of assigning every refined component to one side of the FoV.
/// The inside/outside component lists partition the refined list exactly and
/// their weights sum to the refined total.
struct PartitionResult {
  GaussianMixture inside;
  GaussianMixture outside;
  GaussianMixture refined;
  PartitionDiagnostics diagnostics;
};

/// Position-space split axis: the axis orthogonal to the most grid planes of
/// consistent inclusion/exclusion. Ties prefer the larger position-marginal
/// eigenvalue, then the smaller index (both realized by the descending
/// eigenvalue order of `position_basis`).
/// Throws ValidationError when the classification is uniform (nothing to split).
int choose_position_direction(const GridClassification& classification,
                              const EigenBasis& position_basis);

/// Full-state eigenvector most aligned with the chosen position direction:
/// argmax_k |[v_p^T 0^T] v_k|. Ties prefer the larger eigenvalue, then the
/// smaller index.
int choose_fullstate_direction(int position_axis, const EigenBasis& position_basis,
                               const EigenBasis& full_basis, int position_dim);

/// Replaces one component by its R-term split along the full-state
/// eigenvector with index `eigen_index` (descending eigenvalue order):
///   child weight  = w~_j * w
///   child mean    = m + sqrt(lambda_k) m~_j v_k
///   child cov     = V diag(lambda_1, ..., sigma^2 lambda_k, ..., lambda_n) V^T
/// Total weight and mixture mean are preserved (the library is symmetric).
std::vector<GaussianComponent> split_component(const GaussianComponent& component,
                                               int eigen_index,
                                               const SplitParameters& params);

/// Recursive refinement: components below the weight floor or whose
/// collocation grid is uniformly classified pass through unsplit; the rest
/// are split once along the chosen direction and the newly split set recurses.
/// Stops when nothing qualifies or the depth cap is reached (flagged in
/// diagnostics, not an error). Total weight is conserved.
GaussianMixture split_for_fov(const GaussianMixture& gm, const FieldOfView& fov,
                              const SplitConfig& config, const SplitLibrary& library,
                              SplitDiagnostics* diagnostics = nullptr);

/// Mean-based partition: a component goes inside iff the position block of
/// its mean lies in the FoV (boundary counts as inside).
PartitionResult mean_partition(const GaussianMixture& gm, const FieldOfView& fov);

struct UpdateResult {
  GaussianMixture posterior;
  /// Pre-normalization mass retained by the update: the FoV inclusion
  /// probability for presence, exclusion probability for absence, and
  /// 1 - p_d * inclusion for non-detection.
  double retained_mass = 0.0;
  PartitionDiagnostics diagnostics;
};

/// Conditions a normalized density on presence inside the FoV: refine, keep
/// the inside partition, renormalize. Throws ContradictionError when no mass
/// is retained.
UpdateResult update_presence(const GaussianMixture& gm, const FieldOfView& fov,
                             const SplitConfig& config, const SplitLibrary& library);

/// Conditions on absence (complement side). Same contract as update_presence.
UpdateResult update_absence(const GaussianMixture& gm, const FieldOfView& fov,
                            const SplitConfig& config, const SplitLibrary& library);

/// Non-detection update with constant detection probability inside the FoV:
/// posterior proportional to (1 - p_d 1_S(x)) p(x), built from the partition
/// as (1 - p_d) p_S + p_C(S). p_d = 0 returns the input unchanged; p_d = 1
/// reduces to update_absence.
UpdateResult update_nondetection(const GaussianMixture& gm, const FieldOfView& fov,
                                 double detection_prob, const SplitConfig& config,
                                 const SplitLibrary& library);

}  // namespace fovstat
