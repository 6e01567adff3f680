#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fovstat/planner.hpp"
#include "fovstat/rng.hpp"
#include "oracles.hpp"

using namespace fovstat;

namespace {

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

GaussianMixture point_density(double x, double y, double sigma) {
  std::vector<GaussianComponent> cs;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  cov(0, 0) = sigma * sigma;
  cov(1, 1) = sigma * sigma;
  cs.emplace_back(1.0, vec2(x, y), cov);
  return GaussianMixture(std::move(cs), 2);
}

FieldOfView centered_box(double half_x, double half_y) {
  return FieldOfView(AxisAlignedBox{vec2(-half_x, -half_y), vec2(half_x, half_y)});
}

/// Four near-certain objects clustered at `certain_at` and four
/// half-existence objects clustered at `half_at`.
MultiBernoulli two_cluster_model(const Eigen::VectorXd& certain_at,
                                 const Eigen::VectorXd& half_at, double sigma) {
  std::vector<BernoulliComponent> comps;
  const double offsets[4][2] = {{-0.25, -0.25}, {0.25, -0.25}, {-0.25, 0.25}, {0.25, 0.25}};
  for (const auto& o : offsets) {
    comps.push_back({1.0 - 1e-9,
                     point_density(certain_at(0) + o[0], certain_at(1) + o[1], sigma)});
  }
  for (const auto& o : offsets) {
    comps.push_back({0.5, point_density(half_at(0) + o[0], half_at(1) + o[1], sigma)});
  }
  return MultiBernoulli(std::move(comps));
}

PlacementQuery exact_query(RfsModel model, FieldOfView fov_template, AxisAlignedBox roi,
                           int resolution) {
  return PlacementQuery{std::move(fov_template), std::move(roi), resolution, std::move(model),
                        PmfOptions{}, ExactBoxDiagonalMethod{}};
}

}  // namespace

TEST_CASE("evaluate_candidate") {
  std::vector<BernoulliComponent> comps;
  comps.push_back({0.5, point_density(0.0, 0.0, 0.01)});
  const MultiBernoulli single(std::move(comps));
  const PlacementQuery query = exact_query(single, centered_box(0.5, 0.5),
                                           AxisAlignedBox{vec2(-2, -2), vec2(2, 2)}, 2);

  SUBCASE("FoV far from all mass has (near) zero variance") {
    const auto [pmf, variance] = evaluate_candidate(vec2(50.0, 50.0), query);
    CHECK(variance == doctest::Approx(0.0));
    CHECK(pmf.probabilities[0] == doctest::Approx(1.0));
  }
  SUBCASE("FoV containing one half-existence object attains the 0.25 maximum") {
    const auto [pmf, variance] = evaluate_candidate(vec2(0.0, 0.0), query);
    CHECK(variance == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pmf.probabilities[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("a certain object contained entirely contributes no variance") {
    std::vector<BernoulliComponent> comps2;
    comps2.push_back({1.0 - 1e-9, point_density(0.0, 0.0, 0.01)});
    PlacementQuery certain = query;
    certain.model = MultiBernoulli(std::move(comps2));
    const auto [pmf, variance] = evaluate_candidate(vec2(0.0, 0.0), certain);
    CHECK(variance <= 1e-8);
    CHECK(pmf.probabilities[1] == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("grid_search") {
  SUBCASE("concentrated object pulls the best center within one cell") {
    // sigma comparable to the template makes the captured mass strictly
    // peaked in the center, so the argmax cannot drift along a plateau.
    std::vector<BernoulliComponent> comps;
    comps.push_back({0.5, point_density(0.53, -0.74, 0.3)});
    const MultiBernoulli model(std::move(comps));
    const PlacementQuery query = exact_query(model, centered_box(0.5, 0.5),
                                             AxisAlignedBox{vec2(-2, -2), vec2(2, 2)}, 17);
    const PlacementResult result = grid_search(query);
    const double cell = 4.0 / 16.0;
    CHECK(std::abs(result.best_center(0) - 0.53) <= cell);
    CHECK(std::abs(result.best_center(1) + 0.74) <= cell);
    CHECK(result.variance_map.size() == 17 * 17);
  }
  SUBCASE("half-existence cluster beats the certain cluster") {
    // Template half-width 0.6: only the centered placement keeps all four
    // half-existence objects 5+ sigma inside, making the argmax unique.
    const MultiBernoulli model = two_cluster_model(vec2(-1, -1), vec2(1, 1), 0.02);
    const PlacementQuery query = exact_query(model, centered_box(0.6, 0.6),
                                             AxisAlignedBox{vec2(-2, -2), vec2(2, 2)}, 17);
    const PlacementResult result = grid_search(query);
    CHECK(result.best_center(0) == doctest::Approx(1.0));
    CHECK(result.best_center(1) == doctest::Approx(1.0));
    CHECK(result.best_variance == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("an edge bisecting certain objects creates variance") {
    // Containing all four near-certain objects gives ~zero variance; an FoV
    // edge through the cluster leaves each object half in, half out.
    std::vector<BernoulliComponent> comps;
    const double offsets[4][2] = {{-0.25, -0.25}, {0.25, -0.25}, {-0.25, 0.25}, {0.25, 0.25}};
    for (const auto& o : offsets) {
      comps.push_back({1.0 - 1e-9, point_density(o[0], o[1], 0.2)});
    }
    const MultiBernoulli model(std::move(comps));
    const PlacementQuery query = exact_query(model, centered_box(1.0, 1.0),
                                             AxisAlignedBox{vec2(-4, -4), vec2(4, 4)}, 2);
    const auto [contained_pmf, contained_var] = evaluate_candidate(vec2(0, 0), query);
    // Center (1.25, 0) puts the left FoV edge exactly through two component
    // means: each contributes the Bernoulli maximum of ~0.25.
    const auto [bisect_pmf, bisect_var] = evaluate_candidate(vec2(1.25, 0.0), query);
    CHECK(contained_var < 0.05);
    CHECK(bisect_var > 0.45);
    CHECK(bisect_var > contained_var + 0.4);
  }
}

TEST_CASE("grid_search and evaluate_candidate agree exactly (no caching drift)") {
  const MultiBernoulli model = two_cluster_model(vec2(-1, -1), vec2(1, 1), 0.1);

  SUBCASE("exact masses") {
    const PlacementQuery query = exact_query(model, centered_box(0.75, 0.75),
                                             AxisAlignedBox{vec2(-2, -2), vec2(2, 2)}, 9);
    const PlacementResult result = grid_search(query);
    const auto [pmf, variance] = evaluate_candidate(result.best_center, query);
    CHECK(variance == result.best_variance);
    CHECK(pmf.probabilities == result.best_pmf.probabilities);
  }
  SUBCASE("Monte Carlo masses reuse identical per-component samples") {
    const PlacementQuery query{centered_box(0.75, 0.75),
                               AxisAlignedBox{vec2(-2, -2), vec2(2, 2)},
                               9,
                               model,
                               PmfOptions{},
                               MonteCarloMethod{20000, 424242}};
    const PlacementResult result = grid_search(query);
    const auto [pmf, variance] = evaluate_candidate(result.best_center, query);
    CHECK(variance == result.best_variance);  // cached and direct paths match bitwise
    CHECK(pmf.probabilities == result.best_pmf.probabilities);
    for (std::size_t i = 0; i < result.variance_map.size(); i += 7) {
      const auto [pi, vi] = evaluate_candidate(result.variance_map[i].center, query);
      CHECK(vi == result.variance_map[i].variance);
    }
  }
}

TEST_CASE("translation equivariance with exact masses") {
  // Dyadic coordinates keep every arithmetic step exact under integer shifts.
  const MultiBernoulli model = two_cluster_model(vec2(-1, -1), vec2(1, 1), 0.125);
  const Eigen::VectorXd t = vec2(10.0, -7.0);

  const PlacementQuery base = exact_query(model, centered_box(0.75, 0.75),
                                          AxisAlignedBox{vec2(-2, -2), vec2(2, 2)}, 17);
  const PlacementResult base_result = grid_search(base);

  std::vector<BernoulliComponent> shifted;
  for (const auto& c : model.components()) {
    const auto& g = c.density.components()[0];
    std::vector<GaussianComponent> cs;
    cs.emplace_back(g.weight(), (g.mean() + t).eval(), g.covariance());
    shifted.push_back({c.existence, GaussianMixture(std::move(cs), 2)});
  }
  const PlacementQuery moved =
      exact_query(MultiBernoulli(std::move(shifted)), centered_box(0.75, 0.75),
                  AxisAlignedBox{(vec2(-2, -2) + t).eval(), (vec2(2, 2) + t).eval()}, 17);
  const PlacementResult moved_result = grid_search(moved);

  CHECK(moved_result.best_center(0) == base_result.best_center(0) + t(0));
  CHECK(moved_result.best_center(1) == base_result.best_center(1) + t(1));
  CHECK(moved_result.best_variance == base_result.best_variance);
}

TEST_CASE("mc pmf placement is bit-reproducible") {
  const MultiBernoulli model = two_cluster_model(vec2(-1, -1), vec2(1, 1), 0.1);
  PmfOptions options;
  options.algorithm = PmfOptions::Algorithm::mc;
  options.mc_trials = 5000;
  options.mc_seed = 9;
  const PlacementQuery query{centered_box(0.75, 0.75),
                             AxisAlignedBox{vec2(-2, -2), vec2(2, 2)},
                             5,
                             model,
                             options,
                             ExactBoxDiagonalMethod{}};
  const PlacementResult a = grid_search(query);
  const PlacementResult b = grid_search(query);
  CHECK(a.best_center == b.best_center);
  CHECK(a.best_variance == b.best_variance);
  CHECK(a.best_pmf.probabilities == b.best_pmf.probabilities);
  for (std::size_t i = 0; i < a.variance_map.size(); ++i) {
    CHECK(a.variance_map[i].variance == b.variance_map[i].variance);
  }
}

TEST_CASE("query validation") {
  std::vector<BernoulliComponent> comps;
  comps.push_back({0.5, point_density(0, 0, 0.1)});
  const MultiBernoulli model(std::move(comps));
  PlacementQuery query = exact_query(model, centered_box(0.5, 0.5),
                                     AxisAlignedBox{vec2(-1, -1), vec2(1, 1)}, 1);
  CHECK_THROWS_AS(grid_search(query), ValidationError);  // resolution < 2

  PlacementQuery bad_dim = query;
  bad_dim.grid_resolution = 2;
  Eigen::VectorXd lo1(1), hi1(1);
  lo1 << -1;
  hi1 << 1;
  bad_dim.roi = AxisAlignedBox{lo1, hi1};
  CHECK_THROWS_AS(grid_search(bad_dim), ValidationError);
}
