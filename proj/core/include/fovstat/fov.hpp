#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "fovstat/errors.hpp"
#include "fovstat/gaussian.hpp"

namespace fovstat {

/// Axis-aligned box lo <= x <= hi. Bounds may be -inf/+inf, so half-spaces
/// and half-lines are expressible as degenerate boxes.
struct AxisAlignedBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

/// Intersection of half-spaces normals * x <= offsets. An infeasible system
/// is permitted and behaves as an always-false region.
struct ConvexPolytope {
  Eigen::MatrixXd normals;  // k x dim
  Eigen::VectorXd offsets;  // k
};

struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;
};

/// Sensor field of view: a compact region of position space with exact,
/// closed-set membership (boundary points are inside).
class FieldOfView {
public:
  using Shape = std::variant<AxisAlignedBox, ConvexPolytope, Ball>;

  FieldOfView(AxisAlignedBox box);      // NOLINT: implicit by design
  FieldOfView(ConvexPolytope polytope); // NOLINT
  FieldOfView(Ball ball);               // NOLINT

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }

  /// Exact membership test. Throws ValidationError on dimension mismatch.
  bool contains(const Eigen::VectorXd& x) const;

private:
  Shape shape_;
  int dim_;
};

/// The region shifted by t.
FieldOfView translate(const FieldOfView& fov, const Eigen::VectorXd& t);

/// Membership of a whitened-space point: maps z back through the inverse
/// whitening of (basis, mean_p) and tests the original region. Equivalent to
/// membership of z in the transformed region.
bool contains_transformed(const FieldOfView& fov, const Eigen::VectorXd& z,
                          const EigenBasis& basis, const Eigen::VectorXd& mean_p);

/// Uniform collocation lattice on whitened space: per axis,
/// coordinate(i) = -zeta + 2 zeta i / (points_per_dim - 1) for i = 0..N-1.
struct CollocationGrid {
  double zeta = 3.0;
  int points_per_dim = 7;
  int dim = 2;

  double coordinate(int i) const {
    return -zeta + 2.0 * zeta * (static_cast<double>(i) /
                                 static_cast<double>(points_per_dim - 1));
  }
  std::size_t total_points() const;
};

/// Inclusion pattern of a component's collocation grid against the FoV.
struct GridClassification {
  /// Inclusion flag per grid point; linear index runs axis 0 fastest.
  std::vector<std::uint8_t> inside;
  /// True when every flag equals the first (uniformly in or uniformly out).
  bool all_same = true;
  /// Per axis j: number of grid planes of constant z_j that are uniformly
  /// inside or uniformly outside.
  std::vector<int> plane_consistency;
};

/// Classifies every grid point via contains_transformed and summarizes
/// uniformity per plane.
GridClassification classify_grid(const FieldOfView& fov, const CollocationGrid& grid,
                                 const EigenBasis& basis, const Eigen::VectorXd& mean_p);

/// Number of columns of `points` (one point per column) inside the region.
int count_inside(const FieldOfView& fov, const Eigen::MatrixXd& points);

}  // namespace fovstat
