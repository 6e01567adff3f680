#include "fovstat/planner.hpp"

#include <cmath>
#include <memory>

namespace fovstat {

namespace {

int model_position_dim(const RfsModel& model) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PoissonRfs>) {
          return m.intensity().position_dim();
        } else if constexpr (std::is_same_v<T, IidcRfs>) {
          return m.spatial().position_dim();
        } else if constexpr (std::is_same_v<T, MultiBernoulli>) {
          return m.position_dim();
        } else {
          for (const auto& c : m.components()) {
            if (!c.densities.empty()) return c.densities.front().position_dim();
          }
          throw ValidationError("GLMB model carries no densities");
        }
      },
      model);
}

void validate_query(const PlacementQuery& query) {
  const int dim = static_cast<int>(query.roi.lo.size());
  if (query.grid_resolution < 2) {
    throw ValidationError("placement grid needs at least two points per axis");
  }
  if (query.roi.hi.size() != query.roi.lo.size() || !query.roi.lo.allFinite() ||
      !query.roi.hi.allFinite()) {
    throw ValidationError("placement ROI must be a finite box");
  }
  if (query.fov_template.dim() != dim || model_position_dim(query.model) != dim) {
    throw ValidationError("placement template, ROI, and model dimensions must agree");
  }
}

Eigen::VectorXd grid_center(const PlacementQuery& query, const std::vector<int>& index) {
  const int dim = static_cast<int>(query.roi.lo.size());
  Eigen::VectorXd c(dim);
  for (int d = 0; d < dim; ++d) {
    c(d) = query.roi.lo(d) + (query.roi.hi(d) - query.roi.lo(d)) *
                                 (static_cast<double>(index[d]) /
                                  static_cast<double>(query.grid_resolution - 1));
  }
  return c;
}

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int d = 0; d < a.size(); ++d) {
    if (a(d) != b(d)) return a(d) < b(d);
  }
  return false;
}

/// Per-component Monte Carlo position samples, drawn once and reused across
/// candidate FoVs. Counting against a translated FoV reproduces fov_mass with
/// the per-component derived seed bit for bit.
class MbSampleCache {
public:
  MbSampleCache(const MultiBernoulli& mb, const MonteCarloMethod& method)
      : samples_(method.samples) {
    points_.reserve(mb.size());
    for (std::size_t i = 0; i < mb.size(); ++i) {
      const auto derived =
          std::get<MonteCarloMethod>(per_component_method(MonteCarloMethod{method}, i));
      points_.push_back(
          sample_positions(mb.components()[i].density, derived.samples, derived.seed));
    }
  }

  std::vector<double> masses(const FieldOfView& fov) const {
    std::vector<double> q(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      q[i] = static_cast<double>(count_inside(fov, points_[i])) /
             static_cast<double>(samples_);
    }
    return q;
  }

private:
  int samples_;
  std::vector<Eigen::MatrixXd> points_;
};

}  // namespace

std::pair<CardinalityPmf, double> evaluate_candidate(const Eigen::VectorXd& center,
                                                     const PlacementQuery& query) {
  validate_query(query);
  const FieldOfView fov = translate(query.fov_template, center);
  CardinalityPmf pmf = fov_cardinality_pmf(query.model, fov, query.mass_method,
                                           query.pmf_options);
  const double variance = pmf_moments(pmf).variance;
  return {std::move(pmf), variance};
}

PlacementResult grid_search(const PlacementQuery& query) {
  validate_query(query);
  const int dim = static_cast<int>(query.roi.lo.size());
  const int res = query.grid_resolution;

  const auto* mb = std::get_if<MultiBernoulli>(&query.model);
  const auto* mc = std::get_if<MonteCarloMethod>(&query.mass_method);
  std::unique_ptr<MbSampleCache> cache;
  if (mb != nullptr && mc != nullptr) {
    cache = std::make_unique<MbSampleCache>(*mb, *mc);
  }

  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(res);

  PlacementResult result;
  result.variance_map.reserve(total);

  std::vector<int> index(dim, 0);
  bool have_best = false;
  for (std::size_t node = 0; node < total; ++node) {
    const Eigen::VectorXd center = grid_center(query, index);
    const FieldOfView fov = translate(query.fov_template, center);

    CardinalityPmf pmf;
    if (cache != nullptr) {
      pmf = mb_pmf_from_masses(*mb, cache->masses(fov), query.pmf_options);
    } else {
      pmf = fov_cardinality_pmf(query.model, fov, query.mass_method, query.pmf_options);
    }
    const double variance = pmf_moments(pmf).variance;
    result.variance_map.push_back({center, variance});

    if (!have_best || variance > result.best_variance ||
        (variance == result.best_variance &&
         lexicographically_less(center, result.best_center))) {
      have_best = true;
      result.best_variance = variance;
      result.best_center = center;
      result.best_pmf = std::move(pmf);
    }

    for (int d = 0; d < dim; ++d) {
      if (++index[d] < res) break;
      index[d] = 0;
    }
  }
  return result;
}

}  // namespace fovstat
