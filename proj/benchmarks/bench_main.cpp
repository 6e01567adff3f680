#include <benchmark/benchmark.h>

#include <filesystem>
#include <limits>
#include <memory>

#include "fovstat/cardinality.hpp"
#include "fovstat/partition.hpp"
#include "fovstat/planner.hpp"
#include "fovstat/rng.hpp"

using namespace fovstat;

namespace {

std::shared_ptr<const SplitLibrary> library() {
  static const auto lib = std::make_shared<const SplitLibrary>(
      load_library(std::filesystem::path(FOVSTAT_DATA_DIR) / "split_library.json"));
  return lib;
}

GaussianMixture standard_normal_2d() {
  std::vector<GaussianComponent> cs;
  cs.emplace_back(1.0, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
  return GaussianMixture(std::move(cs), 2);
}

FieldOfView half_plane() {
  Eigen::VectorXd lo(2), hi(2);
  lo << -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity();
  hi << 0.0, std::numeric_limits<double>::infinity();
  return FieldOfView(AxisAlignedBox{lo, hi});
}

MultiBernoulli hundred_object_model() {
  Eigen::VectorXd lo(2), hi(2);
  lo << -2, -2;
  hi << 2, 2;
  return sample_mb_scenario(100, AxisAlignedBox{lo, hi}, {0.35, 1.0}, CovarianceSpec{}, 2026);
}

void BM_SplitForFov(benchmark::State& state) {
  const GaussianMixture gm = standard_normal_2d();
  const FieldOfView fov = half_plane();
  SplitConfig cfg;
  cfg.min_weight = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(split_for_fov(gm, fov, cfg, *library()));
  }
}
BENCHMARK(BM_SplitForFov)->Arg(100)->Arg(1000);

void BM_UpdateAbsence(benchmark::State& state) {
  const GaussianMixture gm = standard_normal_2d();
  const FieldOfView fov = half_plane();
  const SplitConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_absence(gm, fov, cfg, *library()));
  }
}
BENCHMARK(BM_UpdateAbsence);

void BM_MbCardinalityDp(benchmark::State& state) {
  const MultiBernoulli mb = hundred_object_model();
  Eigen::VectorXd lo(2), hi(2);
  lo << -0.5, -0.5;
  hi << 0.5, 0.5;
  const FieldOfView fov{AxisAlignedBox{lo, hi}};
  const MonteCarloMethod mass{10000, 7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mb_fov_pmf_dp(mb, fov, mass));
  }
}
BENCHMARK(BM_MbCardinalityDp);

void BM_MbCardinalityExhaustive(benchmark::State& state) {
  CounterRng rng(1, 0);
  std::vector<BernoulliComponent> comps;
  for (int i = 0; i < state.range(0); ++i) {
    std::vector<GaussianComponent> cs;
    cs.emplace_back(1.0, Eigen::VectorXd::Constant(1, rng.uniform(-2, 2)),
                    Eigen::MatrixXd::Constant(1, 1, 1.0));
    comps.push_back({0.5, GaussianMixture(std::move(cs), 1)});
  }
  const MultiBernoulli mb(std::move(comps));
  Eigen::VectorXd lo(1), hi(1);
  lo << -1;
  hi << 1;
  const FieldOfView fov{AxisAlignedBox{lo, hi}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mb_fov_pmf_exact(mb, fov, ExactBoxDiagonalMethod{}));
  }
}
BENCHMARK(BM_MbCardinalityExhaustive)->Arg(8)->Arg(12)->Arg(14);

void BM_MbCardinalityStochastic(benchmark::State& state) {
  const MultiBernoulli mb = hundred_object_model();
  Eigen::VectorXd lo(2), hi(2);
  lo << -0.5, -0.5;
  hi << 0.5, 0.5;
  const FieldOfView fov{AxisAlignedBox{lo, hi}};
  const MonteCarloMethod mass{10000, 7};
  const int trials = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mb_fov_pmf_mc(mb, fov, mass, trials, 7));
  }
}
BENCHMARK(BM_MbCardinalityStochastic)->Arg(10000)->Arg(100000);

void BM_FovMassMonteCarlo(benchmark::State& state) {
  const GaussianMixture gm = standard_normal_2d();
  Eigen::VectorXd lo(2), hi(2);
  lo << -1, -1;
  hi << 1, 1;
  const FieldOfView fov{AxisAlignedBox{lo, hi}};
  const MonteCarloMethod method{static_cast<int>(state.range(0)), 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fov_mass(gm, fov, method));
  }
}
BENCHMARK(BM_FovMassMonteCarlo)->Arg(10000)->Arg(100000);

void BM_PlannerCandidate(benchmark::State& state) {
  PlacementQuery query{half_plane(),  // replaced below
                       AxisAlignedBox{Eigen::VectorXd(2), Eigen::VectorXd(2)},
                       2,
                       hundred_object_model(),
                       PmfOptions{},
                       MonteCarloMethod{10000, 7}};
  Eigen::VectorXd lo(2), hi(2);
  lo << -0.5, -0.5;
  hi << 0.5, 0.5;
  query.fov_template = FieldOfView(AxisAlignedBox{lo, hi});
  query.roi.lo = Eigen::VectorXd::Constant(2, -2.0);
  query.roi.hi = Eigen::VectorXd::Constant(2, 2.0);
  Eigen::VectorXd center(2);
  center << -0.5, 1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_candidate(center, query));
  }
}
BENCHMARK(BM_PlannerCandidate);

}  // namespace

BENCHMARK_MAIN();
