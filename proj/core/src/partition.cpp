#include "fovstat/partition.hpp"

#include <cmath>

namespace fovstat {

namespace {

void validate_config(const SplitConfig& cfg) {
  if (!(cfg.min_weight > 0.0) || !(cfg.min_weight < 1.0)) {
    throw ValidationError("split config requires min_weight in (0, 1)");
  }
  if (cfg.max_depth < 1) {
    throw ValidationError("split config requires max_depth >= 1");
  }
  if (cfg.grid_points < 2 || !(cfg.grid_halfwidth > 0.0)) {
    throw ValidationError("split config requires grid_points >= 2 and grid_halfwidth > 0");
  }
}

struct RefineContext {
  const FieldOfView& fov;
  const SplitConfig& config;
  const SplitParameters& params;
  CollocationGrid grid;
  int position_dim;
  SplitDiagnostics* diag;
};

// One recursion level of the refinement. `depth` counts completed levels.
std::vector<GaussianComponent> refine(std::vector<GaussianComponent> components, int depth,
                                      RefineContext& ctx) {
  if (components.empty()) return components;

  std::vector<GaussianComponent> split;
  std::vector<GaussianComponent> no_split;
  for (auto& c : components) {
    if (c.weight() < ctx.config.min_weight) {
      no_split.push_back(std::move(c));
      continue;
    }
    const Eigen::VectorXd mean_p = c.mean().head(ctx.position_dim);
    const Eigen::MatrixXd cov_p =
        c.covariance().topLeftCorner(ctx.position_dim, ctx.position_dim);
    const EigenBasis basis_p = eigendecompose(cov_p);
    const GridClassification cls = classify_grid(ctx.fov, ctx.grid, basis_p, mean_p);
    if (cls.all_same) {
      no_split.push_back(std::move(c));
      continue;
    }
    if (depth >= ctx.config.max_depth) {
      if (ctx.diag != nullptr) ctx.diag->depth_capped = true;
      no_split.push_back(std::move(c));
      continue;
    }
    const int j_star = choose_position_direction(cls, basis_p);
    const EigenBasis basis_full = eigendecompose(c.covariance());
    const int k_star =
        choose_fullstate_direction(j_star, basis_p, basis_full, ctx.position_dim);
    std::vector<GaussianComponent> children = split_component(c, k_star, ctx.params);
    if (ctx.diag != nullptr) ++ctx.diag->splits_performed;
    for (auto& child : children) split.push_back(std::move(child));
  }

  if (!split.empty()) {
    if (ctx.diag != nullptr && depth + 1 > ctx.diag->depth_reached) {
      ctx.diag->depth_reached = depth + 1;
    }
    split = refine(std::move(split), depth + 1, ctx);
  }
  for (auto& c : no_split) split.push_back(std::move(c));
  return split;
}

}  // namespace

int choose_position_direction(const GridClassification& classification,
                              const EigenBasis& position_basis) {
  if (classification.all_same) {
    throw ValidationError("no split direction for a uniformly classified grid");
  }
  const auto& c = classification.plane_consistency;
  if (c.empty() || static_cast<int>(c.size()) != position_basis.dim()) {
    throw ValidationError("classification does not match the position basis dimension");
  }
  // Eigenvalues are descending, so the first maximum realizes both tie rules
  // (largest eigenvalue, then smallest index).
  int best = 0;
  for (int j = 1; j < static_cast<int>(c.size()); ++j) {
    if (c[j] > c[best]) best = j;
  }
  return best;
}

int choose_fullstate_direction(int position_axis, const EigenBasis& position_basis,
                               const EigenBasis& full_basis, int position_dim) {
  if (position_axis < 0 || position_axis >= position_basis.dim()) {
    throw ValidationError("position axis out of range");
  }
  const Eigen::VectorXd v_p = position_basis.eigenvectors.col(position_axis);
  int best = 0;
  double best_score = -1.0;
  for (int k = 0; k < full_basis.dim(); ++k) {
    const double score =
        std::abs(v_p.dot(full_basis.eigenvectors.col(k).head(position_dim)));
    if (score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

std::vector<GaussianComponent> split_component(const GaussianComponent& component,
                                               int eigen_index,
                                               const SplitParameters& params) {
  const EigenBasis basis = eigendecompose(component.covariance());
  if (eigen_index < 0 || eigen_index >= basis.dim()) {
    throw ValidationError("split eigen index out of range");
  }

  Eigen::VectorXd scaled = basis.eigenvalues;
  scaled(eigen_index) *= params.sigma * params.sigma;
  Eigen::MatrixXd cov =
      basis.eigenvectors * scaled.asDiagonal() * basis.eigenvectors.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();

  const double step = std::sqrt(basis.eigenvalues(eigen_index));
  const Eigen::VectorXd direction = basis.eigenvectors.col(eigen_index);

  std::vector<GaussianComponent> children;
  children.reserve(params.weights.size());
  for (std::size_t j = 0; j < params.weights.size(); ++j) {
    children.emplace_back(params.weights[j] * component.weight(),
                          (component.mean() + step * params.means[j] * direction).eval(), cov);
  }
  return children;
}

GaussianMixture split_for_fov(const GaussianMixture& gm, const FieldOfView& fov,
                              const SplitConfig& config, const SplitLibrary& library,
                              SplitDiagnostics* diagnostics) {
  validate_config(config);
  if (fov.dim() != gm.position_dim()) {
    throw ValidationError("FoV dimension does not match the mixture position dimension");
  }
  if (gm.empty()) {
    return gm;
  }

  bool exact_lambda = true;
  const SplitParameters& params = library.find(config.split_count, config.lambda, &exact_lambda);
  if (diagnostics != nullptr) {
    *diagnostics = SplitDiagnostics{};
    diagnostics->lambda_fallback = !exact_lambda;
  }

  RefineContext ctx{fov, config, params,
                    CollocationGrid{config.grid_halfwidth, config.grid_points,
                                    gm.position_dim()},
                    gm.position_dim(), diagnostics};
  std::vector<GaussianComponent> components = gm.components();
  components = refine(std::move(components), 0, ctx);
  return GaussianMixture(std::move(components), gm.position_dim());
}

PartitionResult mean_partition(const GaussianMixture& gm, const FieldOfView& fov) {
  if (fov.dim() != gm.position_dim()) {
    throw ValidationError("FoV dimension does not match the mixture position dimension");
  }
  std::vector<GaussianComponent> inside;
  std::vector<GaussianComponent> outside;
  double mass_in = 0.0;
  double mass_out = 0.0;
  for (std::size_t l = 0; l < gm.size(); ++l) {
    const auto& c = gm.components()[l];
    if (fov.contains(c.mean().head(gm.position_dim()))) {
      mass_in += c.weight();
      inside.push_back(c);
    } else {
      mass_out += c.weight();
      outside.push_back(c);
    }
  }

  auto wrap = [&](std::vector<GaussianComponent>&& cs) {
    if (cs.empty()) return GaussianMixture(gm.state_dim(), gm.position_dim());
    return GaussianMixture(std::move(cs), gm.position_dim());
  };

  PartitionResult result{wrap(std::move(inside)), wrap(std::move(outside)), gm, {}};
  result.diagnostics.mass_inside = mass_in;
  result.diagnostics.mass_outside = mass_out;
  return result;
}

namespace {

PartitionResult refine_and_partition(const GaussianMixture& gm, const FieldOfView& fov,
                                     const SplitConfig& config, const SplitLibrary& library) {
  if (!gm.is_normalized()) {
    throw ValidationError("update requires a normalized density");
  }
  SplitDiagnostics split_diag;
  GaussianMixture refined = split_for_fov(gm, fov, config, library, &split_diag);
  PartitionResult part = mean_partition(refined, fov);
  part.diagnostics.splits_performed = split_diag.splits_performed;
  part.diagnostics.depth_reached = split_diag.depth_reached;
  part.diagnostics.depth_capped = split_diag.depth_capped;
  return part;
}

GaussianMixture renormalized(const GaussianMixture& side, double mass, int state_dim,
                             int position_dim) {
  std::vector<GaussianComponent> out;
  out.reserve(side.size());
  for (const auto& c : side.components()) {
    out.emplace_back(c.weight() / mass, c.mean(), c.covariance());
  }
  if (out.empty()) return GaussianMixture(state_dim, position_dim);
  return GaussianMixture(std::move(out), position_dim);
}

}  // namespace

UpdateResult update_presence(const GaussianMixture& gm, const FieldOfView& fov,
                             const SplitConfig& config, const SplitLibrary& library) {
  PartitionResult part = refine_and_partition(gm, fov, config, library);
  const double mass = part.diagnostics.mass_inside;
  if (!(mass > 0.0)) {
    throw ContradictionError("presence update retained zero mass: no density inside the FoV");
  }
  return {renormalized(part.inside, mass, gm.state_dim(), gm.position_dim()), mass,
          part.diagnostics};
}

UpdateResult update_absence(const GaussianMixture& gm, const FieldOfView& fov,
                            const SplitConfig& config, const SplitLibrary& library) {
  PartitionResult part = refine_and_partition(gm, fov, config, library);
  const double mass = part.diagnostics.mass_outside;
  if (!(mass > 0.0)) {
    throw ContradictionError("absence update retained zero mass: no density outside the FoV");
  }
  return {renormalized(part.outside, mass, gm.state_dim(), gm.position_dim()), mass,
          part.diagnostics};
}

UpdateResult update_nondetection(const GaussianMixture& gm, const FieldOfView& fov,
                                 double detection_prob, const SplitConfig& config,
                                 const SplitLibrary& library) {
  if (!(detection_prob >= 0.0) || !(detection_prob <= 1.0)) {
    throw ValidationError("detection probability must lie in [0, 1]");
  }
  if (detection_prob == 0.0) {
    if (!gm.is_normalized()) {
      throw ValidationError("update requires a normalized density");
    }
    return {gm, 1.0, {}};
  }

  PartitionResult part = refine_and_partition(gm, fov, config, library);
  const double keep = 1.0 - detection_prob;
  const double mass = keep * part.diagnostics.mass_inside + part.diagnostics.mass_outside;
  if (!(mass > 0.0)) {
    throw ContradictionError(
        "non-detection update retained zero mass: certain detection over the full support");
  }

  std::vector<GaussianComponent> out;
  out.reserve(part.refined.size());
  for (const auto& c : part.inside.components()) {
    const double w = keep * c.weight();
    if (w > 0.0) out.emplace_back(w / mass, c.mean(), c.covariance());
  }
  for (const auto& c : part.outside.components()) {
    out.emplace_back(c.weight() / mass, c.mean(), c.covariance());
  }
  GaussianMixture posterior = out.empty()
                                  ? GaussianMixture(gm.state_dim(), gm.position_dim())
                                  : GaussianMixture(std::move(out), gm.position_dim());
  return {std::move(posterior), mass, part.diagnostics};
}

}  // namespace fovstat
