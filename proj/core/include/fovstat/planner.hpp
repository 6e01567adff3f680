#pragma once

#include <utility>
#include <vector>

#include "fovstat/cardinality.hpp"
#include "fovstat/fov.hpp"
#include "fovstat/rfs_models.hpp"

namespace fovstat {

/// Sensor placement search: a FoV template (expressed centered at the origin)
/// is translated to every node of a uniform grid of candidate centers over
/// the ROI, and the candidate maximizing the FoV cardinality variance wins.
struct PlacementQuery {
  FieldOfView fov_template;
  AxisAlignedBox roi;
  int grid_resolution = 2;  // candidate centers per axis, endpoints included
  RfsModel model;
  PmfOptions pmf_options;
  FovMassMethod mass_method;
};

struct PlacementCandidate {
  Eigen::VectorXd center;
  double variance = 0.0;
};

struct PlacementResult {
  /// One entry per grid node, in grid order (axis 0 fastest).
  std::vector<PlacementCandidate> variance_map;
  Eigen::VectorXd best_center;
  double best_variance = 0.0;
  CardinalityPmf best_pmf;
};

/// FoV cardinality pmf and its variance for the template translated to
/// `center`.
std::pair<CardinalityPmf, double> evaluate_candidate(const Eigen::VectorXd& center,
                                                     const PlacementQuery& query);

/// Exhaustive evaluation over the candidate grid. Ties on variance go to the
/// lexicographically smallest center. Deterministic given the query; the MB
/// Monte Carlo mass path caches per-component samples across candidates with
/// results identical to evaluate_candidate.
PlacementResult grid_search(const PlacementQuery& query);

}  // namespace fovstat
