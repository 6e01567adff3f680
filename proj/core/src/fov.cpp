#include "fovstat/fov.hpp"

#include <cmath>

namespace fovstat {

namespace {

bool box_contains(const AxisAlignedBox& box, const Eigen::VectorXd& x) {
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) < box.lo(i) || x(i) > box.hi(i)) return false;
  }
  return true;
}

bool polytope_contains(const ConvexPolytope& poly, const Eigen::VectorXd& x) {
  for (int r = 0; r < poly.normals.rows(); ++r) {
    if (poly.normals.row(r).dot(x) > poly.offsets(r)) return false;
  }
  return true;
}

bool ball_contains(const Ball& ball, const Eigen::VectorXd& x) {
  return (x - ball.center).squaredNorm() <= ball.radius * ball.radius;
}

}  // namespace

FieldOfView::FieldOfView(AxisAlignedBox box) : shape_(std::move(box)) {
  const auto& b = std::get<AxisAlignedBox>(shape_);
  if (b.lo.size() == 0 || b.lo.size() != b.hi.size()) {
    throw ValidationError("box bounds must be nonempty and equally sized");
  }
  for (int i = 0; i < b.lo.size(); ++i) {
    if (std::isnan(b.lo(i)) || std::isnan(b.hi(i)) || !(b.lo(i) < b.hi(i))) {
      throw ValidationError("box requires lo < hi componentwise");
    }
  }
  dim_ = static_cast<int>(b.lo.size());
}

FieldOfView::FieldOfView(ConvexPolytope polytope) : shape_(std::move(polytope)) {
  const auto& p = std::get<ConvexPolytope>(shape_);
  if (p.normals.rows() == 0 || p.normals.cols() == 0 ||
      p.normals.rows() != p.offsets.size()) {
    throw ValidationError("polytope requires one offset per half-space row");
  }
  if (!p.normals.allFinite() || p.offsets.hasNaN()) {
    throw ValidationError("polytope entries must be finite");
  }
  dim_ = static_cast<int>(p.normals.cols());
}

FieldOfView::FieldOfView(Ball ball) : shape_(std::move(ball)) {
  const auto& b = std::get<Ball>(shape_);
  if (b.center.size() == 0 || !b.center.allFinite()) {
    throw ValidationError("ball center must be nonempty and finite");
  }
  if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
    throw ValidationError("ball radius must be positive and finite");
  }
  dim_ = static_cast<int>(b.center.size());
}

bool FieldOfView::contains(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw ValidationError("membership test dimension mismatch");
  }
  return std::visit(
      [&x](const auto& shape) -> bool {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, AxisAlignedBox>) return box_contains(shape, x);
        if constexpr (std::is_same_v<T, ConvexPolytope>) return polytope_contains(shape, x);
        if constexpr (std::is_same_v<T, Ball>) return ball_contains(shape, x);
      },
      shape_);
}

FieldOfView translate(const FieldOfView& fov, const Eigen::VectorXd& t) {
  if (t.size() != fov.dim()) {
    throw ValidationError("translation dimension mismatch");
  }
  return std::visit(
      [&t](const auto& shape) -> FieldOfView {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, AxisAlignedBox>) {
          return FieldOfView(AxisAlignedBox{shape.lo + t, shape.hi + t});
        } else if constexpr (std::is_same_v<T, ConvexPolytope>) {
          return FieldOfView(ConvexPolytope{shape.normals, shape.offsets + shape.normals * t});
        } else {
          return FieldOfView(Ball{shape.center + t, shape.radius});
        }
      },
      fov.shape());
}

bool contains_transformed(const FieldOfView& fov, const Eigen::VectorXd& z,
                          const EigenBasis& basis, const Eigen::VectorXd& mean_p) {
  return fov.contains(from_whitened(basis, mean_p, z));
}

std::size_t CollocationGrid::total_points() const {
  std::size_t n = 1;
  for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points_per_dim);
  return n;
}

GridClassification classify_grid(const FieldOfView& fov, const CollocationGrid& grid,
                                 const EigenBasis& basis, const Eigen::VectorXd& mean_p) {
  if (grid.dim != fov.dim()) {
    throw ValidationError("collocation grid dimension does not match the FoV");
  }
  if (grid.points_per_dim < 2 || !(grid.zeta > 0.0)) {
    throw ValidationError("grid requires points_per_dim >= 2 and zeta > 0");
  }

  const int n = grid.points_per_dim;
  const int dim = grid.dim;
  const std::size_t total = grid.total_points();

  GridClassification cls;
  cls.inside.resize(total);
  // inside_count[j][i]: points inside on the plane z_j = coordinate(i).
  std::vector<std::vector<int>> inside_count(dim, std::vector<int>(n, 0));

  std::vector<int> index(dim, 0);
  Eigen::VectorXd z(dim);
  for (std::size_t p = 0; p < total; ++p) {
    for (int d = 0; d < dim; ++d) z(d) = grid.coordinate(index[d]);
    const bool in = contains_transformed(fov, z, basis, mean_p);
    cls.inside[p] = in ? 1 : 0;
    if (in) {
      for (int d = 0; d < dim; ++d) ++inside_count[d][index[d]];
    }
    for (int d = 0; d < dim; ++d) {
      if (++index[d] < n) break;
      index[d] = 0;
    }
  }

  cls.all_same = true;
  for (std::size_t p = 1; p < total; ++p) {
    if (cls.inside[p] != cls.inside[0]) {
      cls.all_same = false;
      break;
    }
  }

  std::size_t plane_size = total / static_cast<std::size_t>(n);
  cls.plane_consistency.assign(dim, 0);
  for (int d = 0; d < dim; ++d) {
    for (int i = 0; i < n; ++i) {
      const int c = inside_count[d][i];
      if (c == 0 || c == static_cast<int>(plane_size)) ++cls.plane_consistency[d];
    }
  }
  return cls;
}

int count_inside(const FieldOfView& fov, const Eigen::MatrixXd& points) {
  if (points.rows() != fov.dim()) {
    throw ValidationError("count_inside expects one point per column of the FoV dimension");
  }
  int count = 0;
  // Boxes dominate the Monte Carlo paths; test them without the variant hop.
  if (const auto* box = std::get_if<AxisAlignedBox>(&fov.shape())) {
    const int dim = static_cast<int>(points.rows());
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      bool in = true;
      for (int d = 0; d < dim; ++d) {
        const double v = points(d, c);
        if (v < box->lo(d) || v > box->hi(d)) {
          in = false;
          break;
        }
      }
      count += in ? 1 : 0;
    }
    return count;
  }
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    if (fov.contains(points.col(c))) ++count;
  }
  return count;
}

}  // namespace fovstat
