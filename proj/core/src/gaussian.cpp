#include "fovstat/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace fovstat {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kSpdTol = 1e-12;

void require_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError("matrix is not square");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(scale, 1e-300)) {
    throw ValidationError("matrix is not symmetric within 1e-12 relative tolerance");
  }
}

}  // namespace

EigenBasis eigendecompose(const Eigen::MatrixXd& matrix) {
  require_symmetric(matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw ValidationError("eigendecomposition failed to converge");
  }

  const int n = static_cast<int>(matrix.rows());
  // Reorder to descending eigenvalues; a stable sort keeps the solver's
  // ordering for repeated eigenvalues (so the identity maps to itself).
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return solver.eigenvalues()(a) > solver.eigenvalues()(b);
  });
  EigenBasis basis;
  basis.eigenvalues.resize(n);
  basis.eigenvectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    basis.eigenvalues(i) = solver.eigenvalues()(order[i]);
    basis.eigenvectors.col(i) = solver.eigenvectors().col(order[i]);
  }

  const double max_eig = basis.eigenvalues(0);
  if (!(max_eig > 0.0) || basis.eigenvalues(n - 1) <= kSpdTol * max_eig) {
    throw NonPositiveDefiniteError("matrix is not positive-definite (eigenvalue <= 1e-12 * max)");
  }

  // Sign convention: first entry of magnitude above 1e-12 is made positive.
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      const double v = basis.eigenvectors(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) basis.eigenvectors.col(c) = -basis.eigenvectors.col(c);
        break;
      }
    }
  }
  return basis;
}

Eigen::VectorXd to_whitened(const EigenBasis& basis, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& x) {
  return basis.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
         (basis.eigenvectors.transpose() * (x - mean));
}

Eigen::VectorXd from_whitened(const EigenBasis& basis, const Eigen::VectorXd& mean,
                              const Eigen::VectorXd& z) {
  return basis.eigenvectors * (basis.eigenvalues.cwiseSqrt().asDiagonal() * z) + mean;
}

GaussianComponent::GaussianComponent(double weight, Eigen::VectorXd mean,
                                     Eigen::MatrixXd covariance)
    : weight_(weight), mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (!(weight_ >= 0.0) || !std::isfinite(weight_)) {
    throw ValidationError("component weight must be finite and nonnegative");
  }
  if (mean_.size() == 0 || !mean_.allFinite()) {
    throw ValidationError("component mean must be nonempty and finite");
  }
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
    throw ValidationError("covariance dimension does not match mean length");
  }
  if (!covariance_.allFinite()) {
    throw ValidationError("covariance must be finite");
  }
  // Rejects asymmetric or non-SPD matrices; repairs nothing.
  eigendecompose(covariance_);
}

double GaussianComponent::pdf(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) {
    throw ValidationError("pdf argument dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  const Eigen::VectorXd diff = x - mean_;
  const double quad = diff.dot(llt.solve(diff));
  double log_det = 0.0;
  for (int i = 0; i < covariance_.rows(); ++i) {
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const double log_norm =
      -0.5 * (static_cast<double>(mean_.size()) * std::log(2.0 * std::numbers::pi) + log_det);
  return std::exp(log_norm - 0.5 * quad);
}

GaussianMixture::GaussianMixture(int state_dim, int position_dim)
    : state_dim_(state_dim), position_dim_(position_dim) {
  if (state_dim_ < 1 || position_dim_ < 1 || position_dim_ > state_dim_) {
    throw ValidationError("mixture dimensions must satisfy 1 <= position_dim <= state_dim");
  }
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components, int position_dim)
    : components_(std::move(components)), position_dim_(position_dim) {
  if (components_.empty()) {
    throw ValidationError("use the (state_dim, position_dim) constructor for empty mixtures");
  }
  state_dim_ = components_.front().dim();
  if (position_dim_ < 1 || position_dim_ > state_dim_) {
    throw ValidationError("mixture dimensions must satisfy 1 <= position_dim <= state_dim");
  }
  for (const auto& c : components_) {
    if (c.dim() != state_dim_) {
      throw ValidationError("all mixture components must share the same state dimension");
    }
  }
}

double GaussianMixture::total_weight() const {
  double sum = 0.0;
  for (const auto& c : components_) sum += c.weight();
  return sum;
}

bool GaussianMixture::is_normalized(double tol) const {
  return std::abs(total_weight() - 1.0) <= tol;
}

double GaussianMixture::pdf(const Eigen::VectorXd& x) const {
  double value = 0.0;
  for (const auto& c : components_) value += c.weight() * c.pdf(x);
  return value;
}

Eigen::VectorXd GaussianMixture::position_mean(std::size_t l) const {
  return components_.at(l).mean().head(position_dim_);
}

Eigen::MatrixXd GaussianMixture::position_covariance(std::size_t l) const {
  return components_.at(l).covariance().topLeftCorner(position_dim_, position_dim_);
}

GaussianMixture marginalize_position(const GaussianMixture& gm) {
  const int np = gm.position_dim();
  if (np == gm.state_dim()) {
    return gm;
  }
  std::vector<GaussianComponent> out;
  out.reserve(gm.size());
  for (const auto& c : gm.components()) {
    out.emplace_back(c.weight(), c.mean().head(np).eval(),
                     c.covariance().topLeftCorner(np, np).eval());
  }
  if (out.empty()) {
    return GaussianMixture(np, np);
  }
  return GaussianMixture(std::move(out), np);
}

double gaussian_inner_product(const Eigen::VectorXd& m1, const Eigen::MatrixXd& p1,
                              const Eigen::VectorXd& m2, const Eigen::MatrixXd& p2) {
  const Eigen::MatrixXd sum = p1 + p2;
  Eigen::LLT<Eigen::MatrixXd> llt(sum);
  const Eigen::VectorXd diff = m1 - m2;
  const double quad = diff.dot(llt.solve(diff));
  double log_det = 0.0;
  for (int i = 0; i < sum.rows(); ++i) {
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  }
  const double log_norm =
      -0.5 * (static_cast<double>(m1.size()) * std::log(2.0 * std::numbers::pi) + log_det);
  return std::exp(log_norm - 0.5 * quad);
}

double l2_distance(const GaussianMixture& a, const GaussianMixture& b) {
  if (a.state_dim() != b.state_dim()) {
    throw ValidationError("l2_distance requires mixtures of equal state dimension");
  }
  auto self_term = [](const GaussianMixture& gm) {
    double s = 0.0;
    for (std::size_t i = 0; i < gm.size(); ++i) {
      const auto& ci = gm.components()[i];
      s += ci.weight() * ci.weight() *
           gaussian_inner_product(ci.mean(), ci.covariance(), ci.mean(), ci.covariance());
      for (std::size_t j = i + 1; j < gm.size(); ++j) {
        const auto& cj = gm.components()[j];
        s += 2.0 * ci.weight() * cj.weight() *
             gaussian_inner_product(ci.mean(), ci.covariance(), cj.mean(), cj.covariance());
      }
    }
    return s;
  };
  double cross = 0.0;
  for (const auto& ca : a.components()) {
    for (const auto& cb : b.components()) {
      cross += ca.weight() * cb.weight() *
               gaussian_inner_product(ca.mean(), ca.covariance(), cb.mean(), cb.covariance());
    }
  }
  const double value = self_term(a) - 2.0 * cross + self_term(b);
  return value > 0.0 ? value : 0.0;
}

MixtureMoments mixture_moments(const GaussianMixture& gm) {
  const double total = gm.total_weight();
  if (!(total > 0.0)) {
    throw ValidationError("mixture_moments requires positive total weight");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(gm.state_dim());
  for (const auto& c : gm.components()) {
    mean += (c.weight() / total) * c.mean();
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(gm.state_dim(), gm.state_dim());
  for (const auto& c : gm.components()) {
    const Eigen::VectorXd d = c.mean() - mean;
    cov += (c.weight() / total) * (c.covariance() + d * d.transpose());
  }
  return {std::move(mean), std::move(cov)};
}

GaussianMixture merge_and_prune(const GaussianMixture& gm, double prune_threshold,
                                double merge_threshold) {
  if (prune_threshold < 0.0 || merge_threshold < 0.0) {
    throw ValidationError("merge/prune thresholds must be nonnegative");
  }

  std::vector<const GaussianComponent*> alive;
  for (const auto& c : gm.components()) {
    if (c.weight() >= prune_threshold) alive.push_back(&c);
  }

  if (merge_threshold == 0.0) {
    // No pair can merge; keep surviving components in input order.
    std::vector<GaussianComponent> kept;
    kept.reserve(alive.size());
    for (const auto* c : alive) kept.push_back(*c);
    if (kept.empty()) return GaussianMixture(gm.state_dim(), gm.position_dim());
    return GaussianMixture(std::move(kept), gm.position_dim());
  }

  std::vector<GaussianComponent> out;
  std::vector<bool> used(alive.size(), false);
  for (std::size_t done = 0; done < alive.size();) {
    // Heaviest unused component anchors the next merge group.
    std::size_t anchor = alive.size();
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (!used[i] && (anchor == alive.size() || alive[i]->weight() > alive[anchor]->weight())) {
        anchor = i;
      }
    }
    const GaussianComponent& a = *alive[anchor];
    Eigen::LLT<Eigen::MatrixXd> llt(a.covariance());

    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (used[i]) continue;
      if (i == anchor) {
        group.push_back(i);
        continue;
      }
      const Eigen::VectorXd d = alive[i]->mean() - a.mean();
      const double dist = std::sqrt(std::max(0.0, d.dot(llt.solve(d))));
      if (dist < merge_threshold) group.push_back(i);
    }

    if (group.size() == 1) {
      out.push_back(a);
    } else {
      double w = 0.0;
      for (auto i : group) w += alive[i]->weight();
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(gm.state_dim());
      for (auto i : group) mean += (alive[i]->weight() / w) * alive[i]->mean();
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(gm.state_dim(), gm.state_dim());
      for (auto i : group) {
        const Eigen::VectorXd d = alive[i]->mean() - mean;
        cov += (alive[i]->weight() / w) * (alive[i]->covariance() + d * d.transpose());
      }
      cov = 0.5 * (cov + cov.transpose()).eval();
      out.emplace_back(w, std::move(mean), std::move(cov));
    }
    for (auto i : group) used[i] = true;
    done += group.size();
  }

  if (out.empty()) {
    return GaussianMixture(gm.state_dim(), gm.position_dim());
  }
  return GaussianMixture(std::move(out), gm.position_dim());
}

GaussianMixture propagate_linear(const GaussianMixture& gm, const Eigen::MatrixXd& transition,
                                 const Eigen::MatrixXd& process_noise) {
  if (transition.rows() != gm.state_dim() || transition.cols() != gm.state_dim() ||
      process_noise.rows() != gm.state_dim() || process_noise.cols() != gm.state_dim()) {
    throw ValidationError("propagate_linear matrices must be state_dim x state_dim");
  }
  std::vector<GaussianComponent> out;
  out.reserve(gm.size());
  for (const auto& c : gm.components()) {
    Eigen::MatrixXd cov =
        transition * c.covariance() * transition.transpose() + process_noise;
    cov = 0.5 * (cov + cov.transpose()).eval();
    out.emplace_back(c.weight(), (transition * c.mean()).eval(), std::move(cov));
  }
  if (out.empty()) {
    return GaussianMixture(gm.state_dim(), gm.position_dim());
  }
  return GaussianMixture(std::move(out), gm.position_dim());
}

GaussianMixture normalize(const GaussianMixture& gm) {
  const double total = gm.total_weight();
  if (!(total > 0.0)) {
    throw ValidationError("cannot normalize a mixture with zero total weight");
  }
  std::vector<GaussianComponent> out;
  out.reserve(gm.size());
  for (const auto& c : gm.components()) {
    out.emplace_back(c.weight() / total, c.mean(), c.covariance());
  }
  return GaussianMixture(std::move(out), gm.position_dim());
}

}  // namespace fovstat
