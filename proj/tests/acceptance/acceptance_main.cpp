// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fovstat/cardinality.hpp"
#include "fovstat/cli/commands.hpp"
#include "fovstat/cli/scenario.hpp"
#include "fovstat/partition.hpp"
#include "fovstat/planner.hpp"
#include "fovstat/rng.hpp"
#include "oracles.hpp"

using namespace fovstat;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int failures = 0;
std::string detail;

void report(int index, const char* name, bool pass, double seconds) {
  std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", pass ? "PASS" : "FAIL", index, name,
              seconds, detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
  detail.clear();
}

template <typename F>
void run(int index, const char* name, double time_limit_seconds, F&& body) {
  const auto start = Clock::now();
  bool pass = false;
  try {
    pass = body();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (pass && time_limit_seconds > 0.0 && seconds >= time_limit_seconds) {
    pass = false;
    detail += " [exceeded " + std::to_string(time_limit_seconds) + " s budget]";
  }
  report(index, name, pass, seconds);
}

std::shared_ptr<const SplitLibrary> library() {
  static const auto lib = std::make_shared<const SplitLibrary>(
      load_library(std::filesystem::path(FOVSTAT_DATA_DIR) / "split_library.json"));
  return lib;
}

GaussianMixture normal_1d(double mean, double var, double weight = 1.0) {
  std::vector<GaussianComponent> cs;
  cs.emplace_back(weight, Eigen::VectorXd::Constant(1, mean),
                  Eigen::MatrixXd::Constant(1, 1, var));
  return GaussianMixture(std::move(cs), 1);
}

FieldOfView half_line() {
  Eigen::VectorXd lo(1), hi(1);
  lo << -kInf;
  hi << 0.0;
  return FieldOfView(AxisAlignedBox{lo, hi});
}

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

MultiBernoulli random_mb_1d(int count, CounterRng& rng) {
  std::vector<BernoulliComponent> comps;
  for (int i = 0; i < count; ++i) {
    std::vector<GaussianComponent> cs;
    cs.emplace_back(1.0, Eigen::VectorXd::Constant(1, rng.uniform(-3, 3)),
                    Eigen::MatrixXd::Constant(1, 1, rng.uniform(0.3, 2.0)));
    comps.push_back({rng.uniform(0.05, 0.95), GaussianMixture(std::move(cs), 1)});
  }
  return MultiBernoulli(std::move(comps));
}

// ---------------------------------------------------------------------------

bool criterion_poisson_collapse() {
  for (double total : {0.2, 3.0, 16.0}) {  // half-line mass keeps mu = total / 2
    const PoissonRfs model(normal_1d(0.0, 1.0, total));
    const CardinalityPmf collapsed =
        poisson_fov_pmf(model, half_line(), ExactBoxDiagonalMethod{});
    const CardinalityPmf series =
        poisson_fov_pmf_truncated(model, half_line(), ExactBoxDiagonalMethod{});
    const std::size_t n =
        std::min(collapsed.probabilities.size(), series.probabilities.size());
    double max_dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_dev = std::max(max_dev,
                         std::abs(collapsed.probabilities[i] - series.probabilities[i]));
    }
    if (max_dev > 1e-10) {
      detail = "mu = " + std::to_string(total / 2) + " deviates " + std::to_string(max_dev);
      return false;
    }
  }
  return true;
}

bool criterion_mb_triple_agreement() {
  CounterRng rng(2024, 0);
  double worst_dp = 0.0, worst_mc = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform() * 11.0);  // 2..12
    const MultiBernoulli mb = random_mb_1d(m, rng);
    Eigen::VectorXd lo(1), hi(1);
    lo << rng.uniform(-2, 0);
    hi << rng.uniform(0.2, 2);
    const FieldOfView fov{AxisAlignedBox{lo, hi}};

    const CardinalityPmf exact = mb_fov_pmf_exact(mb, fov, ExactBoxDiagonalMethod{});
    const CardinalityPmf dp = mb_fov_pmf_dp(mb, fov, ExactBoxDiagonalMethod{});
    for (std::size_t n = 0; n < exact.probabilities.size(); ++n) {
      worst_dp = std::max(worst_dp,
                          std::abs(exact.probabilities[n] - dp.probabilities[n]));
    }

    const CardinalityPmf mc = mb_fov_pmf_mc(mb, fov, ExactBoxDiagonalMethod{}, 1000000,
                                            500 + trial);
    for (std::size_t n = 0; n < exact.probabilities.size(); ++n) {
      worst_mc = std::max(worst_mc,
                          std::abs(mc.probabilities[n] - exact.probabilities[n]));
    }
  }
  std::ostringstream s;
  s << "worst dp dev " << worst_dp << ", worst mc dev " << worst_mc;
  detail = s.str();
  return worst_dp <= 1e-10 && worst_mc <= 0.002;
}

bool criterion_glmb_oracle() {
  CounterRng rng(2025, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<GlmbComponent> comps;
    const int n_comp = 1 + static_cast<int>(rng.uniform() * 4.0);
    std::vector<double> weights(n_comp);
    double total = 0.0;
    for (int i = 0; i < n_comp; ++i) {
      weights[i] = rng.uniform(0.1, 1.0);
      total += weights[i];
    }
    int next_label = 0;
    for (int i = 0; i < n_comp; ++i) {
      GlmbComponent c;
      c.weight = weights[i] / total;
      const int n_labels = 1 + static_cast<int>(rng.uniform() * 4.0);
      for (int l = 0; l < n_labels; ++l) {
        c.labels.push_back(next_label++);
        std::vector<GaussianComponent> cs;
        cs.emplace_back(1.0, Eigen::VectorXd::Constant(1, rng.uniform(-2, 2)),
                        Eigen::MatrixXd::Constant(1, 1, rng.uniform(0.3, 2.0)));
        c.densities.emplace_back(std::move(cs), 1);
      }
      comps.push_back(std::move(c));
    }
    double wsum = 0.0;
    for (const auto& c : comps) wsum += c.weight;
    for (auto& c : comps) c.weight /= wsum;
    const GlmbDistribution model(std::move(comps));

    Eigen::VectorXd lo(1), hi(1);
    lo << rng.uniform(-2, 0);
    hi << rng.uniform(0.2, 2);
    const FieldOfView fov{AxisAlignedBox{lo, hi}};
    const CardinalityPmf pmf = glmb_fov_pmf(model, fov, ExactBoxDiagonalMethod{});
    if (void_probability(pmf) != pmf.probabilities[0]) {
      detail = "void probability is not the zero entry";
      return false;
    }

    // Subset-enumeration oracle over every hypothesis label set.
    std::size_t n_max = 0;
    for (const auto& c : model.components()) n_max = std::max(n_max, c.labels.size());
    std::vector<double> oracle(n_max + 1, 0.0);
    for (std::size_t ci = 0; ci < model.size(); ++ci) {
      const auto& c = model.components()[ci];
      const FovMassMethod cm = per_component_method(ExactBoxDiagonalMethod{}, ci);
      std::vector<double> q(c.labels.size());
      for (std::size_t li = 0; li < c.labels.size(); ++li) {
        q[li] = fov_mass(c.densities[li], fov, per_component_method(cm, li));
      }
      const unsigned bits = static_cast<unsigned>(c.labels.size());
      for (unsigned mask = 0; mask < (1u << bits); ++mask) {
        double term = 1.0;
        int count = 0;
        for (unsigned li = 0; li < bits; ++li) {
          if ((mask >> li) & 1u) {
            term *= q[li];
            ++count;
          } else {
            term *= 1.0 - q[li];
          }
        }
        oracle[count] += c.weight * term;
      }
    }
    for (std::size_t n = 0; n < oracle.size(); ++n) {
      worst = std::max(worst, std::abs(pmf.probabilities[n] - oracle[n]));
    }
  }
  std::ostringstream s;
  s << "worst dev " << worst;
  detail = s.str();
  return worst <= 1e-12;
}

bool criterion_partition_accuracy() {
  double previous = kInf;
  std::ostringstream s;
  for (double w_min : {0.05, 0.01, 0.002}) {
    SplitConfig cfg;
    cfg.min_weight = w_min;
    cfg.split_count = 3;
    cfg.lambda = 1e-3;
    const GaussianMixture refined =
        split_for_fov(normal_1d(0.0, 1.0), half_line(), cfg, *library());
    const double mass = mean_partition(refined, half_line()).diagnostics.mass_inside;
    const double error = std::abs(mass - 0.5);
    s << "w_min " << w_min << " -> err " << error << "; ";
    if (w_min == 0.01 && error > 0.02) {
      detail = s.str() + "exceeds 0.02 at the reference settings";
      return false;
    }
    if (error > previous + 1e-12) {
      detail = s.str() + "error increased as w_min decreased";
      return false;
    }
    previous = error;
  }
  detail = s.str();
  return true;
}

bool criterion_conservation() {
  CounterRng rng(2026, 0);
  const SplitConfig cfg;  // update-path defaults
  double worst_weight = 0.0, worst_mean = 0.0, worst_sum = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int state_dim = (trial % 2 == 0) ? 2 : 4;
    const GaussianMixture gm = oracles::random_mixture(state_dim, 2, 3, rng, 2.0);

    FieldOfView fov = [&]() -> FieldOfView {
      if (trial % 3 == 0) {
        // random convex polytope around a random interior point
        const int k = 3 + static_cast<int>(rng.uniform() * 4.0);
        Eigen::MatrixXd normals(k, 2);
        Eigen::VectorXd offsets(k);
        const Eigen::VectorXd center = vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
        for (int r = 0; r < k; ++r) {
          const double angle = rng.uniform(0, 2.0 * M_PI);
          normals(r, 0) = std::cos(angle);
          normals(r, 1) = std::sin(angle);
          offsets(r) = normals.row(r).dot(center) + rng.uniform(0.3, 2.0);
        }
        return FieldOfView(ConvexPolytope{normals, offsets});
      }
      Eigen::VectorXd lo = vec2(rng.uniform(-3, 0), rng.uniform(-3, 0));
      Eigen::VectorXd hi = vec2(rng.uniform(0.3, 3), rng.uniform(0.3, 3));
      return FieldOfView(AxisAlignedBox{lo, hi});
    }();

    const GaussianMixture refined = split_for_fov(gm, fov, cfg, *library());
    worst_weight =
        std::max(worst_weight, std::abs(refined.total_weight() - gm.total_weight()));
    const Eigen::VectorXd mean_before = mixture_moments(gm).mean;
    const Eigen::VectorXd mean_after = mixture_moments(refined).mean;
    worst_mean = std::max(worst_mean, (mean_before - mean_after).cwiseAbs().maxCoeff());

    const PartitionResult part = mean_partition(refined, fov);
    worst_sum = std::max(worst_sum,
                         std::abs(part.diagnostics.mass_inside +
                                  part.diagnostics.mass_outside - refined.total_weight()));
  }
  std::ostringstream s;
  s << "worst weight drift " << worst_weight << ", mean drift " << worst_mean
    << ", side sum drift " << worst_sum;
  detail = s.str();
  return worst_weight <= 1e-12 && worst_mean <= 1e-9 && worst_sum <= 1e-12;
}

bool criterion_mass_agreement() {
  CounterRng rng(160, 0);
  SplitConfig fine;
  fine.min_weight = 5e-4;
  fine.split_count = 5;
  fine.lambda = 1e-4;
  fine.max_depth = 30;
  const PartitionWeightsMethod pw_method{fine, library()};

  double worst_pw = 0.0, worst_mc_sigmas = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GaussianComponent> cs;
    std::vector<double> w(3);
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      w[i] = rng.uniform(0.2, 1.0);
      total += w[i];
    }
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd mean = vec2(rng.uniform(-2, 2), rng.uniform(-2, 2));
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
      const double s0 = rng.uniform(0.2, 0.8);
      const double s1 = rng.uniform(0.2, 0.8);
      cov(0, 0) = s0 * s0;
      cov(1, 1) = s1 * s1;
      cs.emplace_back(w[i] / total, mean, cov);
    }
    const GaussianMixture p(std::move(cs), 2);
    Eigen::VectorXd lo = vec2(rng.uniform(-2.5, 0), rng.uniform(-2.5, 0));
    Eigen::VectorXd hi = vec2(rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5));
    const FieldOfView fov{AxisAlignedBox{lo, hi}};

    const double exact = fov_mass(p, fov, ExactBoxDiagonalMethod{});
    const double pw = fov_mass(p, fov, pw_method);
    worst_pw = std::max(worst_pw, std::abs(pw - exact));

    const int n = 1000000;
    const double mc = fov_mass(p, fov, MonteCarloMethod{n, static_cast<std::uint64_t>(9000 + trial)});
    const double sigma = std::sqrt(std::max(exact * (1.0 - exact), 1e-12) / n);
    worst_mc_sigmas = std::max(worst_mc_sigmas, std::abs(mc - exact) / sigma);
  }
  std::ostringstream s;
  s << "worst partition dev " << worst_pw << ", worst mc dev " << worst_mc_sigmas
    << " sigma";
  detail = s.str();
  return worst_pw <= 0.02 && worst_mc_sigmas <= 3.0;
}

bool criterion_negative_information_demo() {
  const auto scenario = fovstat::cli::load_scenario(
      std::filesystem::path(FOVSTAT_SCENARIO_DIR) / "negative_info_demo.json");
  const auto out = std::filesystem::temp_directory_path() / "fovstat_acceptance_demo";
  std::filesystem::remove_all(out);
  const auto records = fovstat::cli::cmd_partition_demo(scenario, library(), out);
  std::filesystem::remove_all(out);
  if (records.size() != 3) {
    detail = "expected 3 steps";
    return false;
  }
  std::ostringstream s;
  for (const auto& r : records) {
    s << "step " << r.step << ": pre " << r.mass_inside_pre << " -> post "
      << r.mass_inside_post << "; ";
    if (r.normalization_error > 1e-9) {
      detail = "normalization error " + std::to_string(r.normalization_error);
      return false;
    }
    if (!(r.mass_inside_pre > 0.0) || !(r.mass_inside_post < r.mass_inside_pre)) {
      detail = s.str() + "interior mass did not strictly decrease";
      return false;
    }
  }
  detail = s.str();
  return true;
}

bool criterion_planner_sanity() {
  // Constructed two-cluster scenario: near-certain cluster at (-1,-1),
  // half-existence cluster at (1,1). Dyadic coordinates throughout.
  std::vector<BernoulliComponent> comps;
  const double offsets[4][2] = {{-0.25, -0.25}, {0.25, -0.25}, {-0.25, 0.25}, {0.25, 0.25}};
  auto tight = [&](double x, double y) {
    std::vector<GaussianComponent> cs;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = cov(1, 1) = 0.015625;  // sigma = 0.125
    cs.emplace_back(1.0, vec2(x, y), cov);
    return GaussianMixture(std::move(cs), 2);
  };
  for (const auto& o : offsets) comps.push_back({1.0 - 1e-9, tight(-1 + o[0], -1 + o[1])});
  for (const auto& o : offsets) comps.push_back({0.5, tight(1 + o[0], 1 + o[1])});
  const MultiBernoulli model(std::move(comps));

  PlacementQuery query{FieldOfView(AxisAlignedBox{vec2(-0.75, -0.75), vec2(0.75, 0.75)}),
                       AxisAlignedBox{vec2(-2, -2), vec2(2, 2)},
                       17,
                       model,
                       PmfOptions{},
                       ExactBoxDiagonalMethod{}};
  const PlacementResult base = grid_search(query);
  const double dist = std::max(std::abs(base.best_center(0) - 1.0),
                               std::abs(base.best_center(1) - 1.0));
  if (dist > 0.5) {
    detail = "best center not over the half-existence cluster";
    return false;
  }

  // Exact translation equivariance under t = (10, -7).
  const Eigen::VectorXd t = vec2(10.0, -7.0);
  std::vector<BernoulliComponent> shifted;
  for (const auto& c : model.components()) {
    const auto& g = c.density.components()[0];
    std::vector<GaussianComponent> cs;
    cs.emplace_back(g.weight(), (g.mean() + t).eval(), g.covariance());
    shifted.push_back({c.existence, GaussianMixture(std::move(cs), 2)});
  }
  PlacementQuery moved = query;
  moved.model = MultiBernoulli(std::move(shifted));
  moved.roi = AxisAlignedBox{(query.roi.lo + t).eval(), (query.roi.hi + t).eval()};
  const PlacementResult moved_result = grid_search(moved);
  if (moved_result.best_center(0) != base.best_center(0) + t(0) ||
      moved_result.best_center(1) != base.best_center(1) + t(1)) {
    detail = "translation equivariance violated";
    return false;
  }

  // Hundred-object seeded run with CSV outputs.
  const auto scenario = fovstat::cli::load_scenario(
      std::filesystem::path(FOVSTAT_SCENARIO_DIR) / "hundred_object_plan.json");
  const auto out = std::filesystem::temp_directory_path() / "fovstat_acceptance_plan";
  std::filesystem::remove_all(out);
  const PlacementResult large = fovstat::cli::cmd_plan(scenario, library(), out);
  const bool files = std::filesystem::exists(out / "variance_map.csv") &&
                     std::filesystem::exists(out / "phd_grid.csv") &&
                     std::filesystem::exists(out / "best.json");
  std::filesystem::remove_all(out);
  if (!files) {
    detail = "hundred-object outputs missing";
    return false;
  }
  std::ostringstream s;
  s << "constructed best (" << base.best_center(0) << ", " << base.best_center(1)
    << "), hundred-object best (" << large.best_center(0) << ", " << large.best_center(1)
    << ") variance " << large.best_variance << " over " << large.variance_map.size()
    << " candidates";
  detail = s.str();
  return large.variance_map.size() == 41 * 41;
}

bool criterion_split_library() {
  const auto path = std::filesystem::path(FOVSTAT_DATA_DIR) / "split_library.json";
  const SplitLibrary lib = load_library(path);
  if (lib.entries().size() != 12) {
    detail = "expected 12 shipped entries";
    return false;
  }
  for (const auto& e : lib.entries()) {
    double sum = 0.0;
    for (double w : e.weights) sum += w;
    const int r = e.component_count();
    bool symmetric = true;
    for (int j = 0; j < r; ++j) {
      symmetric = symmetric && e.weights[j] == e.weights[r - 1 - j] &&
                  e.means[j] == -e.means[r - 1 - j];
    }
    if (std::abs(sum - 1.0) > 1e-12 || !symmetric || !(e.sigma > 0.0 && e.sigma < 1.0) ||
        !(e.achieved_cost <= e.lambda)) {
      detail = "entry R=" + std::to_string(r) + " violates an invariant";
      return false;
    }
  }

  const SplitLibrary regen =
      generate_library({2, 3, 4, 5}, {1e-4, 1e-3, 1e-2}, lib.provenance.settings);
  SplitLibrary regen_meta = regen;
  regen_meta.provenance = lib.provenance;
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (serialize_library(regen_meta) != bytes) {
    detail = "regeneration is not byte-identical";
    return false;
  }
  detail = "12 entries valid, regeneration byte-identical";
  return true;
}

}  // namespace

int main() {
  std::printf("fovstat acceptance suite\n");
  run(1, "Poisson collapse (series vs closed form, 1e-10)", 1.0, criterion_poisson_collapse);
  run(2, "MB triple agreement (enumeration / dp / stochastic)", 60.0,
      criterion_mb_triple_agreement);
  run(3, "GLMB subset-enumeration oracle (1e-12)", 0.0, criterion_glmb_oracle);
  run(4, "half-line partition accuracy at reference settings", 5.0,
      criterion_partition_accuracy);
  run(5, "refinement conservation suite (200 random cases)", 0.0, criterion_conservation);
  run(6, "cross-method FoV mass agreement (50 random cases)", 0.0, criterion_mass_agreement);
  run(7, "three-step negative-information demo", 10.0, criterion_negative_information_demo);
  run(8, "placement sanity: clusters, equivariance, hundred-object scale", 60.0,
      criterion_planner_sanity);
  run(9, "shipped split library invariants and regeneration", 0.0, criterion_split_library);

  if (failures == 0) {
    std::printf("all criteria passed\n");
  } else {
    std::printf("%d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
