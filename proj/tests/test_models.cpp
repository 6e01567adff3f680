#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>

#include "fovstat/rfs_models.hpp"
#include "fovstat/rng.hpp"
#include "oracles.hpp"

using namespace fovstat;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<const SplitLibrary> library() {
  static const auto lib = std::make_shared<const SplitLibrary>(
      load_library(std::filesystem::path(FOVSTAT_DATA_DIR) / "split_library.json"));
  return lib;
}

GaussianMixture standard_normal(int dim) {
  std::vector<GaussianComponent> cs;
  cs.emplace_back(1.0, Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
  return GaussianMixture(std::move(cs), dim);
}

FieldOfView box1(double lo, double hi) {
  Eigen::VectorXd l(1), h(1);
  l << lo;
  h << hi;
  return FieldOfView(AxisAlignedBox{l, h});
}

PartitionWeightsMethod partition_method() {
  SplitConfig cfg;
  cfg.min_weight = 0.01;
  cfg.split_count = 3;
  cfg.lambda = 1e-3;
  return {cfg, library()};
}

GaussianMixture diagonal_mixture(int components, CounterRng& rng, double sigma_min = 0.2,
                                 double sigma_max = 0.8) {
  std::vector<GaussianComponent> cs;
  std::vector<double> w(components);
  double total = 0.0;
  for (int i = 0; i < components; ++i) {
    w[i] = rng.uniform(0.2, 1.0);
    total += w[i];
  }
  for (int i = 0; i < components; ++i) {
    Eigen::VectorXd mean(2);
    mean << rng.uniform(-2, 2), rng.uniform(-2, 2);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    const double s0 = rng.uniform(sigma_min, sigma_max);
    const double s1 = rng.uniform(sigma_min, sigma_max);
    cov(0, 0) = s0 * s0;
    cov(1, 1) = s1 * s1;
    cs.emplace_back(w[i] / total, mean, cov);
  }
  return GaussianMixture(std::move(cs), 2);
}

/// Boundary-resolving configuration used when the partitioned mass itself is
/// under test: a five-way low-lambda library entry shrinks straddling cells
/// much faster per unit weight than the update-path default.
PartitionWeightsMethod fine_partition_method() {
  SplitConfig cfg;
  cfg.min_weight = 5e-4;
  cfg.split_count = 5;
  cfg.lambda = 1e-4;
  cfg.max_depth = 30;
  return {cfg, library()};
}

}  // namespace

TEST_CASE("model validation") {
  SUBCASE("multi-Bernoulli rejects r = 1 with guidance") {
    std::vector<BernoulliComponent> comps;
    comps.push_back({1.0, standard_normal(2)});
    CHECK_THROWS_WITH_AS(MultiBernoulli(std::move(comps)),
                         doctest::Contains("1 - 1e-9"), ValidationError);
    std::vector<BernoulliComponent> ok;
    ok.push_back({1.0 - 1e-9, standard_normal(2)});
    CHECK_NOTHROW(MultiBernoulli(std::move(ok)));
  }
  SUBCASE("IIDC cardinality must sum to one") {
    CHECK_THROWS_AS(IidcRfs({0.5, 0.4}, standard_normal(1)), ValidationError);
    CHECK_NOTHROW(IidcRfs({0.5, 0.5}, standard_normal(1)));
  }
  SUBCASE("GLMB labels must be distinct and weights normalized") {
    GlmbComponent c;
    c.weight = 1.0;
    c.labels = {1, 1};
    c.densities = {standard_normal(1), standard_normal(1)};
    CHECK_THROWS_AS(GlmbDistribution({c}), ValidationError);

    GlmbComponent good;
    good.weight = 0.5;
    good.labels = {1};
    good.densities = {standard_normal(1)};
    CHECK_THROWS_AS(GlmbDistribution({good}), ValidationError);  // weights sum to 0.5
  }
  SUBCASE("Poisson caches the intensity total") {
    std::vector<GaussianComponent> cs;
    cs.emplace_back(0.75, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    cs.emplace_back(0.75, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1));
    const PoissonRfs model(GaussianMixture(std::move(cs), 1));
    CHECK(model.mean_cardinality() == 1.5);
  }
}

TEST_CASE("fov_mass") {
  SUBCASE("FoV covering the support gives one for every method") {
    const GaussianMixture p = standard_normal(1);
    const FieldOfView big = box1(-100, 100);
    CHECK(fov_mass(p, big, partition_method()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fov_mass(p, big, ExactBoxDiagonalMethod{}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fov_mass(p, big, MonteCarloMethod{200000, 5}) == doctest::Approx(1.0));
  }
  SUBCASE("half-line mass of a standard normal is one half") {
    const GaussianMixture p = standard_normal(1);
    const FieldOfView half = box1(-kInf, 0.0);
    CHECK(fov_mass(p, half, ExactBoxDiagonalMethod{}) == 0.5);  // erfc(0)/2 exactly
    const double mc = fov_mass(p, half, MonteCarloMethod{1000000, 6});
    CHECK(std::abs(mc - 0.5) < 3.0 * std::sqrt(0.25 / 1000000.0));
    const double pw = fov_mass(p, half, partition_method());
    CHECK(std::abs(pw - 0.5) < 0.02);
  }
  SUBCASE("positive quadrant of a 2-D standard normal is one quarter") {
    Eigen::VectorXd lo(2), hi(2);
    lo << 0, 0;
    hi << kInf, kInf;
    const double q =
        fov_mass(standard_normal(2), FieldOfView(AxisAlignedBox{lo, hi}),
                 ExactBoxDiagonalMethod{});
    CHECK(q == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("exact method geometry errors") {
    Eigen::VectorXd center(1);
    center << 0.0;
    CHECK_THROWS_AS(
        fov_mass(standard_normal(1), FieldOfView(Ball{center, 1.0}), ExactBoxDiagonalMethod{}),
        ValidationError);

    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 0.5, 0.5, 1.0;
    std::vector<GaussianComponent> cs;
    cs.emplace_back(1.0, Eigen::VectorXd::Zero(2), cov);
    const GaussianMixture correlated(std::move(cs), 2);
    Eigen::VectorXd lo(2), hi(2);
    lo << -1, -1;
    hi << 1, 1;
    CHECK_THROWS_AS(
        fov_mass(correlated, FieldOfView(AxisAlignedBox{lo, hi}), ExactBoxDiagonalMethod{}),
        ValidationError);
  }
  SUBCASE("unnormalized input is rejected") {
    std::vector<GaussianComponent> cs;
    cs.emplace_back(2.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    CHECK_THROWS_AS(
        fov_mass(GaussianMixture(std::move(cs), 1), box1(-1, 1), ExactBoxDiagonalMethod{}),
        ValidationError);
  }
}

TEST_CASE("fov_mass methods agree on random diagonal box cases") {
  CounterRng rng(16, 0);
  for (int trial = 0; trial < 15; ++trial) {
    const GaussianMixture p = diagonal_mixture(3, rng);
    Eigen::VectorXd lo(2), hi(2);
    lo << rng.uniform(-2.5, 0), rng.uniform(-2.5, 0);
    hi << rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5);
    const FieldOfView fov{AxisAlignedBox{lo, hi}};

    const double exact = fov_mass(p, fov, ExactBoxDiagonalMethod{});
    const double pw = fov_mass(p, fov, fine_partition_method());
    CHECK(std::abs(pw - exact) <= 0.02);

    const int n = 1000000;
    const double mc = fov_mass(p, fov, MonteCarloMethod{n, static_cast<std::uint64_t>(17 + trial)});
    const double se = std::sqrt(std::max(exact * (1.0 - exact), 1e-12) / n);
    CHECK(std::abs(mc - exact) <= 3.5 * se);
  }
}

TEST_CASE("partition masses of both sides sum to one") {
  CounterRng rng(18, 0);
  const auto method = partition_method();
  for (int trial = 0; trial < 10; ++trial) {
    const GaussianMixture p = diagonal_mixture(3, rng);
    Eigen::VectorXd lo(2), hi(2);
    lo << rng.uniform(-2, 0), rng.uniform(-2, 0);
    hi << rng.uniform(0.3, 2), rng.uniform(0.3, 2);
    const FieldOfView fov{AxisAlignedBox{lo, hi}};
    const GaussianMixture refined = split_for_fov(p, fov, method.config, *method.library);
    const PartitionResult part = mean_partition(refined, fov);
    CHECK(part.diagnostics.mass_inside + part.diagnostics.mass_outside ==
          doctest::Approx(refined.total_weight()).epsilon(1e-12));
  }
}

TEST_CASE("phd_of_mb") {
  SUBCASE("single Bernoulli scales its density by the existence") {
    std::vector<BernoulliComponent> comps;
    comps.push_back({0.5, standard_normal(1)});
    const GaussianMixture phd = phd_of_mb(MultiBernoulli(std::move(comps)));
    CHECK(phd.size() == 1);
    CHECK(phd.components()[0].weight() == 0.5);
    CHECK(phd.total_weight() == 0.5);
  }
  SUBCASE("integral over all space is the existence sum") {
    CounterRng rng(19, 0);
    std::vector<BernoulliComponent> comps;
    double r_sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double r = rng.uniform(0.2, 0.9);
      r_sum += r;
      comps.push_back({r, diagonal_mixture(1, rng)});
    }
    const GaussianMixture phd = phd_of_mb(MultiBernoulli(std::move(comps)));
    CHECK(phd.total_weight() == doctest::Approx(r_sum).epsilon(1e-14));
  }
  SUBCASE("integral over the FoV matches Monte Carlo on each density") {
    CounterRng rng(20, 0);
    std::vector<BernoulliComponent> comps;
    comps.push_back({0.8, diagonal_mixture(2, rng)});
    comps.push_back({0.4, diagonal_mixture(1, rng)});
    const MultiBernoulli mb(std::move(comps));
    Eigen::VectorXd lo(2), hi(2);
    lo << -1, -1;
    hi << 1, 1;
    const FieldOfView fov{AxisAlignedBox{lo, hi}};

    double expected = 0.0;  // sum_i r_i <1_S, p_i> via the exact method
    for (const auto& b : mb.components()) {
      expected += b.existence * fov_mass(b.density, fov, ExactBoxDiagonalMethod{});
    }
    const GaussianMixture phd = phd_of_mb(mb);
    const double total = phd.total_weight();
    const double integral = total * fov_mass(normalize(phd), fov, ExactBoxDiagonalMethod{});
    CHECK(integral == doctest::Approx(expected).epsilon(1e-12));

    const int n = 400000;
    const double mc = total * fov_mass(normalize(phd), fov, MonteCarloMethod{n, 21});
    CHECK(std::abs(mc - expected) < 3.5 * total * std::sqrt(0.25 / n));
  }
}

TEST_CASE("sample_mb_scenario") {
  Eigen::VectorXd lo(2), hi(2);
  lo << -2, -2;
  hi << 2, 2;
  const AxisAlignedBox roi{lo, hi};
  const CovarianceSpec spec{0.005, 0.05};

  SUBCASE("fixed seed reproduces the scenario exactly") {
    const MultiBernoulli a = sample_mb_scenario(20, roi, {0.35, 1.0}, spec, 99);
    const MultiBernoulli b = sample_mb_scenario(20, roi, {0.35, 1.0}, spec, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.components()[i].existence == b.components()[i].existence);
      CHECK(a.components()[i].density.components()[0].mean() ==
            b.components()[i].density.components()[0].mean());
      CHECK(a.components()[i].density.components()[0].covariance() ==
            b.components()[i].density.components()[0].covariance());
    }
  }
  SUBCASE("hundred-object draw respects every range") {
    const MultiBernoulli mb = sample_mb_scenario(100, roi, {0.35, 1.0}, spec, 7);
    CHECK(mb.size() == 100);
    for (const auto& c : mb.components()) {
      CHECK(c.existence >= 0.35);
      CHECK(c.existence < 1.0);
      const Eigen::VectorXd mean = c.density.components()[0].mean();
      for (int d = 0; d < 2; ++d) {
        CHECK(mean(d) >= lo(d));
        CHECK(mean(d) <= hi(d));
      }
      const EigenBasis basis = eigendecompose(c.density.components()[0].covariance());
      CHECK(basis.eigenvalues(0) <= spec.eigenvalue_max * (1 + 1e-9));
      CHECK(basis.eigenvalues(1) >= spec.eigenvalue_min * (1 - 1e-9));
    }
  }
  SUBCASE("different seeds differ") {
    const MultiBernoulli a = sample_mb_scenario(5, roi, {0.35, 1.0}, spec, 1);
    const MultiBernoulli b = sample_mb_scenario(5, roi, {0.35, 1.0}, spec, 2);
    CHECK(a.components()[0].density.components()[0].mean() !=
          b.components()[0].density.components()[0].mean());
  }
}

TEST_CASE("per_component_method derives distinct Monte Carlo substreams") {
  const FovMassMethod base = MonteCarloMethod{1000, 7};
  const auto a = std::get<MonteCarloMethod>(per_component_method(base, 0));
  const auto b = std::get<MonteCarloMethod>(per_component_method(base, 1));
  CHECK(a.seed != b.seed);
  CHECK(a.samples == 1000);
  const auto a2 = std::get<MonteCarloMethod>(per_component_method(base, 0));
  CHECK(a.seed == a2.seed);
  const FovMassMethod exact = ExactBoxDiagonalMethod{};
  CHECK(std::holds_alternative<ExactBoxDiagonalMethod>(per_component_method(exact, 3)));
}
