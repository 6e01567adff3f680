#include "fovstat/rfs_models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fovstat/rng.hpp"

namespace fovstat {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void require_normalized(const GaussianMixture& p, const char* what) {
  if (!p.is_normalized()) {
    throw ValidationError(std::string(what) + " must be a normalized density");
  }
}

}  // namespace

PoissonRfs::PoissonRfs(GaussianMixture intensity)
    : intensity_(std::move(intensity)), mean_cardinality_(intensity_.total_weight()) {
  if (!(mean_cardinality_ >= 0.0) || !std::isfinite(mean_cardinality_)) {
    throw ValidationError("Poisson intensity must have finite nonnegative total weight");
  }
}

IidcRfs::IidcRfs(std::vector<double> cardinality, GaussianMixture spatial)
    : cardinality_(std::move(cardinality)), spatial_(std::move(spatial)) {
  if (cardinality_.empty()) {
    throw ValidationError("IIDC cardinality pmf must be nonempty");
  }
  double sum = 0.0;
  for (double p : cardinality_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("IIDC cardinality entries must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("IIDC cardinality pmf must sum to one within 1e-12");
  }
  require_normalized(spatial_, "IIDC spatial density");
}

MultiBernoulli::MultiBernoulli(std::vector<BernoulliComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw ValidationError("multi-Bernoulli requires at least one component");
  }
  state_dim_ = components_.front().density.state_dim();
  position_dim_ = components_.front().density.position_dim();
  for (const auto& c : components_) {
    if (!(c.existence >= 0.0) || !std::isfinite(c.existence)) {
      throw ValidationError("existence probability must be finite and nonnegative");
    }
    if (c.existence >= 1.0) {
      throw ValidationError(
          "existence probability must be strictly below one (use 1 - 1e-9 for certain objects)");
    }
    require_normalized(c.density, "Bernoulli density");
    if (c.density.state_dim() != state_dim_ || c.density.position_dim() != position_dim_) {
      throw ValidationError("all Bernoulli densities must share the same dimensions");
    }
  }
}

GlmbDistribution::GlmbDistribution(std::vector<GlmbComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw ValidationError("GLMB requires at least one component");
  }
  double sum = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
      throw ValidationError("GLMB component weights must be finite and nonnegative");
    }
    sum += c.weight;
    if (c.labels.size() != c.densities.size()) {
      throw ValidationError("GLMB component needs one density per label");
    }
    std::set<int> distinct(c.labels.begin(), c.labels.end());
    if (distinct.size() != c.labels.size()) {
      throw ValidationError("GLMB labels must be distinct within a component");
    }
    for (const auto& d : c.densities) require_normalized(d, "GLMB label density");
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("GLMB component weights must sum to one within 1e-9");
  }
}

FovMassMethod per_component_method(const FovMassMethod& method, std::uint64_t index) {
  if (const auto* mc = std::get_if<MonteCarloMethod>(&method)) {
    return MonteCarloMethod{mc->samples, hash_combine(mc->seed, index + 1)};
  }
  return method;
}

Eigen::MatrixXd sample_positions(const GaussianMixture& p, int count, std::uint64_t seed) {
  if (count < 1) {
    throw ValidationError("Monte Carlo sampling requires at least one sample");
  }
  if (p.empty()) {
    throw ValidationError("cannot sample from an empty mixture");
  }
  const int np = p.position_dim();
  const std::size_t n_comp = p.size();

  // Component-selection CDF over normalized weights.
  std::vector<double> cdf(n_comp);
  const double total = p.total_weight();
  double acc = 0.0;
  for (std::size_t l = 0; l < n_comp; ++l) {
    acc += p.components()[l].weight() / total;
    cdf[l] = acc;
  }
  cdf.back() = 1.0;

  // Cholesky factor of every position-marginal covariance.
  std::vector<Eigen::MatrixXd> chol(n_comp);
  for (std::size_t l = 0; l < n_comp; ++l) {
    chol[l] = Eigen::LLT<Eigen::MatrixXd>(p.position_covariance(l)).matrixL();
  }

  Eigen::MatrixXd points(np, count);
  Eigen::VectorXd z(np);
  for (int k = 0; k < count; ++k) {
    CounterRng rng(seed, static_cast<std::uint64_t>(k));
    const double u = rng.uniform();
    const std::size_t l =
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    for (int d = 0; d < np; ++d) z(d) = rng.normal();
    points.col(k) = p.position_mean(l) + chol[l] * z;
  }
  return points;
}

namespace {

double mass_partition_weights(const GaussianMixture& p, const FieldOfView& fov,
                              const PartitionWeightsMethod& method) {
  if (method.library == nullptr) {
    throw ValidationError("partition-weights mass method requires a split library");
  }
  GaussianMixture refined = split_for_fov(p, fov, method.config, *method.library);
  const PartitionResult part = mean_partition(refined, fov);
  return std::clamp(part.diagnostics.mass_inside, 0.0, 1.0);
}

double mass_monte_carlo(const GaussianMixture& p, const FieldOfView& fov,
                        const MonteCarloMethod& method) {
  const Eigen::MatrixXd pts = sample_positions(p, method.samples, method.seed);
  return static_cast<double>(count_inside(fov, pts)) / static_cast<double>(method.samples);
}

double mass_exact_box_diagonal(const GaussianMixture& p, const FieldOfView& fov) {
  const auto* box = std::get_if<AxisAlignedBox>(&fov.shape());
  if (box == nullptr) {
    throw ValidationError("exact mass method requires an axis-aligned box FoV");
  }
  const int np = p.position_dim();
  const double total = p.total_weight();
  double mass = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const Eigen::MatrixXd cov = p.position_covariance(l);
    const double scale = cov.diagonal().maxCoeff();
    for (int i = 0; i < np; ++i) {
      for (int j = 0; j < np; ++j) {
        if (i != j && std::abs(cov(i, j)) > 1e-12 * scale) {
          throw ValidationError(
              "exact mass method requires diagonal position-marginal covariances");
        }
      }
    }
    const Eigen::VectorXd mean = p.position_mean(l);
    double q = 1.0;
    for (int d = 0; d < np; ++d) {
      const double sigma = std::sqrt(cov(d, d));
      const double upper =
          std::isinf(box->hi(d)) ? 1.0 : normal_cdf((box->hi(d) - mean(d)) / sigma);
      const double lower =
          std::isinf(box->lo(d)) ? 0.0 : normal_cdf((box->lo(d) - mean(d)) / sigma);
      q *= upper - lower;
    }
    mass += (p.components()[l].weight() / total) * q;
  }
  return std::clamp(mass, 0.0, 1.0);
}

}  // namespace

double fov_mass(const GaussianMixture& p, const FieldOfView& fov, const FovMassMethod& method) {
  require_normalized(p, "fov_mass input");
  if (fov.dim() != p.position_dim()) {
    throw ValidationError("FoV dimension does not match the mixture position dimension");
  }
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PartitionWeightsMethod>) {
          return mass_partition_weights(p, fov, m);
        } else if constexpr (std::is_same_v<T, MonteCarloMethod>) {
          return mass_monte_carlo(p, fov, m);
        } else {
          return mass_exact_box_diagonal(p, fov);
        }
      },
      method);
}

GaussianMixture phd_of_mb(const MultiBernoulli& mb) {
  std::vector<GaussianComponent> out;
  for (const auto& b : mb.components()) {
    for (const auto& c : b.density.components()) {
      out.emplace_back(b.existence * c.weight(), c.mean(), c.covariance());
    }
  }
  return GaussianMixture(std::move(out), mb.position_dim());
}

MultiBernoulli sample_mb_scenario(int count, const AxisAlignedBox& roi,
                                  std::pair<double, double> existence_range,
                                  const CovarianceSpec& spec, std::uint64_t seed) {
  if (count < 1) {
    throw ValidationError("scenario requires at least one component");
  }
  const int dim = static_cast<int>(roi.lo.size());
  if (dim < 1 || roi.hi.size() != roi.lo.size() || !roi.lo.allFinite() || !roi.hi.allFinite()) {
    throw ValidationError("scenario ROI must be a finite box");
  }
  if (!(existence_range.first >= 0.0) || !(existence_range.second <= 1.0) ||
      !(existence_range.first <= existence_range.second)) {
    throw ValidationError("existence range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(spec.eigenvalue_min > 0.0) || !(spec.eigenvalue_min <= spec.eigenvalue_max)) {
    throw ValidationError("covariance spec requires 0 < eigenvalue_min <= eigenvalue_max");
  }

  std::vector<BernoulliComponent> components;
  components.reserve(count);
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));

    Eigen::VectorXd mean(dim);
    for (int d = 0; d < dim; ++d) mean(d) = rng.uniform(roi.lo(d), roi.hi(d));

    double r = rng.uniform(existence_range.first, existence_range.second);
    r = std::min(r, 1.0 - 1e-9);

    Eigen::VectorXd eigs(dim);
    for (int d = 0; d < dim; ++d) {
      eigs(d) = rng.uniform(spec.eigenvalue_min, spec.eigenvalue_max);
    }
    // Random rotation: QR of a Gaussian matrix with positive diagonal of R.
    Eigen::MatrixXd g(dim, dim);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) g(a, b) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int d = 0; d < dim; ++d) {
      if (rmat(d, d) < 0.0) q.col(d) = -q.col(d);
    }
    Eigen::MatrixXd cov = q * eigs.asDiagonal() * q.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();

    std::vector<GaussianComponent> density;
    density.emplace_back(1.0, std::move(mean), std::move(cov));
    components.push_back({r, GaussianMixture(std::move(density), dim)});
  }
  return MultiBernoulli(std::move(components));
}

}  // namespace fovstat
