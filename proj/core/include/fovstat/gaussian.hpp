#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fovstat/errors.hpp"

namespace fovstat {

/// Eigendecomposition of a symmetric positive-definite matrix with a fixed
/// ordering and sign convention so that downstream direction choices are
/// deterministic across platforms:
///   - eigenvalues sorted descending, all strictly positive
///   - eigenvector columns orthonormal
///   - first nonzero entry of each eigenvector is positive
struct EigenBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Decomposes a symmetric positive-definite matrix.
/// Throws NonPositiveDefiniteError if any eigenvalue <= 1e-12 times the
/// largest, and ValidationError if the input is not symmetric to 1e-12
/// relative tolerance.
EigenBasis eigendecompose(const Eigen::MatrixXd& matrix);

/// Whitening map z = Lambda^{-1/2} V^T (x - mean) for the component described
/// by `basis` and `mean`.
Eigen::VectorXd to_whitened(const EigenBasis& basis, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& x);

/// Inverse whitening map x = V Lambda^{1/2} z + mean.
Eigen::VectorXd from_whitened(const EigenBasis& basis, const Eigen::VectorXd& mean,
                              const Eigen::VectorXd& z);

/// One weighted Gaussian density term. Validated at construction:
/// weight >= 0, covariance symmetric (1e-12 relative) and positive-definite,
/// dimensions consistent. Immutable afterwards.
class GaussianComponent {
public:
  GaussianComponent(double weight, Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  double weight() const { return weight_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  int dim() const { return static_cast<int>(mean_.size()); }

  /// Density value at x.
  double pdf(const Eigen::VectorXd& x) const;

private:
  double weight_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
};

/// Weighted Gaussian mixture over an n-dimensional state whose first
/// `position_dim` coordinates are position. The position-first layout is a
/// fixed global convention; constructors reject inconsistent dimensions
/// rather than supporting permuted layouts.
///
/// Weights are not forced to sum to one: intensity functions reuse this type.
class GaussianMixture {
public:
  /// Empty mixture with declared dimensions.
  GaussianMixture(int state_dim, int position_dim);
  GaussianMixture(std::vector<GaussianComponent> components, int position_dim);

  int state_dim() const { return state_dim_; }
  int position_dim() const { return position_dim_; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  bool empty() const { return components_.empty(); }

  double total_weight() const;
  bool is_normalized(double tol = 1e-9) const;

  /// Density value at x (sum of weighted component densities).
  double pdf(const Eigen::VectorXd& x) const;

  /// Position block of component l's mean.
  Eigen::VectorXd position_mean(std::size_t l) const;
  /// Leading position_dim x position_dim block of component l's covariance.
  Eigen::MatrixXd position_covariance(std::size_t l) const;

private:
  std::vector<GaussianComponent> components_;
  int state_dim_;
  int position_dim_;
};

struct MixtureMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Marginal mixture over the position coordinates: weights unchanged,
/// means/covariances are the leading position blocks.
GaussianMixture marginalize_position(const GaussianMixture& gm);

/// Gaussian-Gaussian inner product <N(.;m1,P1), N(.;m2,P2)> = N(m1; m2, P1+P2).
double gaussian_inner_product(const Eigen::VectorXd& m1, const Eigen::MatrixXd& p1,
                              const Eigen::VectorXd& m2, const Eigen::MatrixXd& p2);

/// Closed-form L2 distance <a,a> - 2<a,b> + <b,b> between two mixtures on the
/// same state space. Tiny negative rounding residue is clamped to zero.
double l2_distance(const GaussianMixture& a, const GaussianMixture& b);

/// Weighted mean and total covariance (within-component plus between-component
/// spread). Throws ValidationError on zero total weight.
MixtureMoments mixture_moments(const GaussianMixture& gm);

/// Removes components with weight < prune_threshold, then greedily merges
/// groups within `merge_threshold` Mahalanobis distance (measured in the
/// dominant component's metric) by moment matching. No renormalization is
/// applied; with prune_threshold = 0 the total weight is preserved exactly.
GaussianMixture merge_and_prune(const GaussianMixture& gm, double prune_threshold,
                                double merge_threshold);

/// Pushes every component through x' = F x with additive noise Q:
/// mean -> F m, covariance -> F P F^T + Q.
GaussianMixture propagate_linear(const GaussianMixture& gm, const Eigen::MatrixXd& transition,
                                 const Eigen::MatrixXd& process_noise);

/// Returns a copy scaled so the weights sum to one.
/// Throws ValidationError on zero total weight.
GaussianMixture normalize(const GaussianMixture& gm);

}  // namespace fovstat
