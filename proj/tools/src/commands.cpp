#include "fovstat/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fovstat/cli/csv.hpp"
#include "fovstat/partition.hpp"
#include "fovstat/rng.hpp"

namespace fovstat::cli {

namespace {

using json = nlohmann::ordered_json;

json mixture_to_json(const GaussianMixture& gm) {
  json doc;
  doc["position_dim"] = gm.position_dim();
  doc["components"] = json::array();
  for (const auto& c : gm.components()) {
    json comp;
    comp["weight"] = c.weight();
    comp["mean"] = std::vector<double>(c.mean().data(), c.mean().data() + c.mean().size());
    json cov = json::array();
    for (int r = 0; r < c.covariance().rows(); ++r) {
      cov.push_back(std::vector<double>(c.covariance().row(r).begin(),
                                        c.covariance().row(r).end()));
    }
    comp["covariance"] = cov;
    doc["components"].push_back(std::move(comp));
  }
  return doc;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot open output file for writing: " + path.string());
  }
  out << doc.dump(2) << '\n';
}

PmfOptions make_pmf_options(const std::string& algorithm, int mc_trials,
                            std::optional<std::uint64_t> mc_seed, double detection_prob,
                            std::uint64_t default_seed) {
  PmfOptions options;
  if (algorithm == "dp") {
    options.algorithm = PmfOptions::Algorithm::production;
  } else if (algorithm == "exact") {
    options.algorithm = PmfOptions::Algorithm::exact;
  } else if (algorithm == "mc") {
    options.algorithm = PmfOptions::Algorithm::mc;
  } else {
    throw ValidationError("unknown cardinality algorithm '" + algorithm +
                          "' (expected dp, exact, or mc)");
  }
  options.mc_trials = mc_trials;
  options.mc_seed = mc_seed.value_or(default_seed);
  options.detection_prob = detection_prob;
  return options;
}

/// Constant-velocity transition and discretized white-acceleration noise for
/// a position-first [p, v] state layout.
void cv_model(int position_dim, double dt, double noise_intensity, Eigen::MatrixXd& transition,
              Eigen::MatrixXd& process_noise) {
  const int n = 2 * position_dim;
  transition = Eigen::MatrixXd::Identity(n, n);
  process_noise = Eigen::MatrixXd::Zero(n, n);
  for (int d = 0; d < position_dim; ++d) {
    transition(d, position_dim + d) = dt;
    process_noise(d, d) = noise_intensity * dt * dt * dt / 3.0;
    process_noise(d, position_dim + d) = noise_intensity * dt * dt / 2.0;
    process_noise(position_dim + d, d) = noise_intensity * dt * dt / 2.0;
    process_noise(position_dim + d, position_dim + d) = noise_intensity * dt;
  }
}

void warn_if_lambda_fallback(const SplitConfig& cfg, const SplitLibrary& library) {
  bool exact = true;
  const SplitParameters& entry = library.find(cfg.split_count, cfg.lambda, &exact);
  if (!exact) {
    std::fprintf(stderr,
                 "warning: split library has no entry for lambda = %g; using nearest "
                 "entry lambda = %g\n",
                 cfg.lambda, entry.lambda);
  }
}

AxisAlignedBox derive_density_grid(const GaussianMixture& gm) {
  const int np = gm.position_dim();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(np, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(np, -std::numeric_limits<double>::infinity());
  for (std::size_t l = 0; l < gm.size(); ++l) {
    const Eigen::VectorXd m = gm.position_mean(l);
    const Eigen::VectorXd s = gm.position_covariance(l).diagonal().cwiseSqrt();
    lo = lo.cwiseMin(m - 3.5 * s);
    hi = hi.cwiseMax(m + 3.5 * s);
  }
  return {lo, hi};
}

void write_density_grid(const std::filesystem::path& path, const GaussianMixture& gm,
                        const AxisAlignedBox& box, int resolution) {
  const GaussianMixture marginal = marginalize_position(gm);
  const int np = marginal.state_dim();
  if (np > 2) {
    return;  // gridded density export targets 1-D and 2-D plots
  }
  CsvTable table;
  if (np == 1) {
    table.header = {"x", "density"};
    for (int i = 0; i < resolution; ++i) {
      Eigen::VectorXd x(1);
      x(0) = box.lo(0) + (box.hi(0) - box.lo(0)) * i / static_cast<double>(resolution - 1);
      table.rows.push_back({x(0), marginal.pdf(x)});
    }
  } else {
    table.header = {"x", "y", "density"};
    for (int j = 0; j < resolution; ++j) {
      for (int i = 0; i < resolution; ++i) {
        Eigen::VectorXd x(2);
        x(0) = box.lo(0) + (box.hi(0) - box.lo(0)) * i / static_cast<double>(resolution - 1);
        x(1) = box.lo(1) + (box.hi(1) - box.lo(1)) * j / static_cast<double>(resolution - 1);
        table.rows.push_back({x(0), x(1), marginal.pdf(x)});
      }
    }
  }
  write_csv(path, table);
}

}  // namespace

void cmd_gen_library(const std::vector<int>& component_counts,
                     const std::vector<double>& lambdas,
                     const std::filesystem::path& out_path) {
  if (component_counts.empty() || lambdas.empty()) {
    throw ValidationError("gen-library requires at least one R and one lambda");
  }
  const SplitLibrary lib = generate_library(component_counts, lambdas);
  save_library(lib, out_path);
}

std::vector<DemoStepRecord> cmd_partition_demo(const Scenario& scenario,
                                               std::shared_ptr<const SplitLibrary> library,
                                               const std::filesystem::path& out_dir) {
  if (!scenario.demo.has_value() || !scenario.fov.has_value()) {
    throw ValidationError("partition-demo requires 'demo' and 'fov' scenario blocks");
  }
  if (library == nullptr || library->empty()) {
    throw ValidationError("partition-demo requires a split library");
  }
  const DemoConfig& demo = *scenario.demo;
  if (demo.steps < 1 || !(demo.dt > 0.0)) {
    throw ValidationError("demo requires steps >= 1 and dt > 0");
  }
  GaussianMixture density = demo.initial;
  if (density.state_dim() != 2 * density.position_dim()) {
    throw ValidationError(
        "demo initial density must have a [position, velocity] state (state_dim = 2 n_p)");
  }
  if (!density.is_normalized()) {
    throw ValidationError("demo initial density must be normalized");
  }

  std::filesystem::create_directories(out_dir);
  warn_if_lambda_fallback(scenario.split, *library);
  Eigen::MatrixXd transition, process_noise;
  cv_model(density.position_dim(), demo.dt, demo.process_noise, transition, process_noise);
  const AxisAlignedBox grid_box =
      demo.density_grid.has_value() ? *demo.density_grid : derive_density_grid(density);

  const PartitionWeightsMethod mass_method{scenario.split, library};
  std::vector<DemoStepRecord> records;
  for (int step = 1; step <= demo.steps; ++step) {
    density = propagate_linear(density, transition, process_noise);

    UpdateResult update = update_nondetection(density, *scenario.fov, demo.detection_prob,
                                              scenario.split, *library);
    DemoStepRecord rec;
    rec.step = step;
    rec.mass_inside_pre = update.diagnostics.mass_inside;
    rec.retained_mass = update.retained_mass;
    rec.splits_performed = update.diagnostics.splits_performed;
    rec.depth_reached = update.diagnostics.depth_reached;
    density = std::move(update.posterior);

    rec.mass_inside_post = fov_mass(density, *scenario.fov, mass_method);

    if (demo.prune_threshold > 0.0 || demo.merge_threshold > 0.0) {
      density = merge_and_prune(density, demo.prune_threshold, demo.merge_threshold);
      if (demo.prune_threshold > 0.0) density = normalize(density);
    }
    rec.normalization_error = std::abs(density.total_weight() - 1.0);
    rec.components = static_cast<int>(density.size());
    records.push_back(rec);

    const std::string tag = "step_" + std::to_string(step);
    write_json(out_dir / (tag + "_mixture.json"), mixture_to_json(density));
    write_density_grid(out_dir / (tag + "_density.csv"), density, grid_box,
                       demo.density_resolution);
  }

  CsvTable masses;
  masses.header = {"step",
                   "mass_inside_pre",
                   "retained_mass",
                   "mass_inside_post",
                   "normalization_error",
                   "components",
                   "splits_performed",
                   "depth_reached"};
  for (const auto& r : records) {
    masses.rows.push_back({static_cast<double>(r.step), r.mass_inside_pre, r.retained_mass,
                           r.mass_inside_post, r.normalization_error,
                           static_cast<double>(r.components),
                           static_cast<double>(r.splits_performed),
                           static_cast<double>(r.depth_reached)});
  }
  write_csv(out_dir / "masses.csv", masses);
  return records;
}

CardinalityPmf cmd_cardinality(const Scenario& scenario,
                               std::shared_ptr<const SplitLibrary> library,
                               const std::filesystem::path& out_dir, std::ostream& table_out) {
  if (!scenario.model.has_value() || !scenario.fov.has_value()) {
    throw ValidationError("cardinality requires 'model' and 'fov' scenario blocks");
  }
  const CardinalityConfig config = scenario.cardinality.value_or(CardinalityConfig{});
  const FovMassMethod mass =
      make_mass_method(config.mass, scenario.split, library, scenario.seed);
  const PmfOptions options = make_pmf_options(config.algorithm, config.mc_trials,
                                              config.mc_seed, config.detection_prob,
                                              scenario.seed);

  const CardinalityPmf pmf = fov_cardinality_pmf(*scenario.model, *scenario.fov, mass, options);
  const PmfMoments moments = pmf_moments(pmf);

  table_out << "n,probability\n";
  for (std::size_t n = 0; n < pmf.probabilities.size(); ++n) {
    table_out << n << ',' << format_double(pmf.probabilities[n]) << '\n';
  }
  table_out << "# method=" << pmf.method << " mean=" << format_double(moments.mean)
            << " variance=" << format_double(moments.variance)
            << " void=" << format_double(void_probability(pmf)) << '\n';

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    CsvTable table;
    table.header = {"n", "probability"};
    for (std::size_t n = 0; n < pmf.probabilities.size(); ++n) {
      table.rows.push_back({static_cast<double>(n), pmf.probabilities[n]});
    }
    write_csv(out_dir / "pmf.csv", table);

    json doc;
    doc["method"] = pmf.method;
    doc["truncation"] = pmf.truncation;
    doc["probabilities"] = pmf.probabilities;
    doc["mean"] = moments.mean;
    doc["variance"] = moments.variance;
    doc["void_probability"] = void_probability(pmf);
    write_json(out_dir / "pmf.json", doc);
  }
  return pmf;
}

PlacementResult cmd_plan(const Scenario& scenario,
                         std::shared_ptr<const SplitLibrary> library,
                         const std::filesystem::path& out_dir) {
  if (!scenario.model.has_value() || !scenario.plan.has_value()) {
    throw ValidationError("plan requires 'model' and 'plan' scenario blocks");
  }
  const PlanConfig& plan = *scenario.plan;

  PlacementQuery query{plan.fov_template,
                       plan.roi,
                       plan.grid_resolution,
                       *scenario.model,
                       make_pmf_options(plan.algorithm, plan.mc_trials, plan.mc_seed, 1.0,
                                        scenario.seed),
                       make_mass_method(plan.mass, scenario.split, library, scenario.seed)};
  PlacementResult result = grid_search(query);

  std::filesystem::create_directories(out_dir);
  const int dim = static_cast<int>(result.best_center.size());
  CsvTable map;
  if (dim == 2) {
    map.header = {"cx", "cy", "variance"};
  } else {
    for (int d = 0; d < dim; ++d) map.header.push_back("c" + std::to_string(d + 1));
    map.header.push_back("variance");
  }
  for (const auto& cell : result.variance_map) {
    std::vector<double> row(cell.center.data(), cell.center.data() + cell.center.size());
    row.push_back(cell.variance);
    map.rows.push_back(std::move(row));
  }
  write_csv(out_dir / "variance_map.csv", map);

  json best;
  best["best_center"] = std::vector<double>(result.best_center.data(),
                                            result.best_center.data() + dim);
  best["best_variance"] = result.best_variance;
  best["best_pmf"] = {{"method", result.best_pmf.method},
                      {"probabilities", result.best_pmf.probabilities}};
  write_json(out_dir / "best.json", best);

  // Intensity heat map (PHD) for model families that define one.
  const GaussianMixture* intensity = nullptr;
  GaussianMixture mb_intensity(1, 1);
  if (const auto* mb = std::get_if<MultiBernoulli>(&*scenario.model)) {
    mb_intensity = phd_of_mb(*mb);
    intensity = &mb_intensity;
  } else if (const auto* poisson = std::get_if<PoissonRfs>(&*scenario.model)) {
    intensity = &poisson->intensity();
  }
  if (intensity != nullptr && intensity->position_dim() == 2) {
    const GaussianMixture marginal = marginalize_position(*intensity);
    CsvTable phd;
    phd.header = {"x", "y", "phd"};
    const int res = plan.phd_resolution;
    for (int j = 0; j < res; ++j) {
      for (int i = 0; i < res; ++i) {
        Eigen::VectorXd x(2);
        x(0) = plan.roi.lo(0) +
               (plan.roi.hi(0) - plan.roi.lo(0)) * i / static_cast<double>(res - 1);
        x(1) = plan.roi.lo(1) +
               (plan.roi.hi(1) - plan.roi.lo(1)) * j / static_cast<double>(res - 1);
        phd.rows.push_back({x(0), x(1), marginal.pdf(x)});
      }
    }
    write_csv(out_dir / "phd_grid.csv", phd);
  }
  return result;
}

}  // namespace fovstat::cli
