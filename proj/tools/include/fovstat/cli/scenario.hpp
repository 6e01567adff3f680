#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "fovstat/fov.hpp"
#include "fovstat/gaussian.hpp"
#include "fovstat/partition.hpp"
#include "fovstat/rfs_models.hpp"

namespace fovstat::cli {

/// FoV mass strategy as written in a scenario file; resolved into a
/// FovMassMethod once the split library and default seed are known.
struct MassMethodSpec {
  enum class Kind { partition_weights, monte_carlo, exact_box_diagonal };
  Kind kind = Kind::partition_weights;
  int samples = 100000;
  std::optional<std::uint64_t> seed;
};

FovMassMethod make_mass_method(const MassMethodSpec& spec, const SplitConfig& split,
                               std::shared_ptr<const SplitLibrary> library,
                               std::uint64_t default_seed);

/// Settings for the moving-object negative-information demo.
struct DemoConfig {
  GaussianMixture initial{4, 2};
  double dt = 1.0;
  int steps = 3;
  double process_noise = 0.0;
  double detection_prob = 1.0;
  double prune_threshold = 0.0;
  double merge_threshold = 0.0;
  std::optional<AxisAlignedBox> density_grid;
  int density_resolution = 61;
};

struct CardinalityConfig {
  std::string algorithm = "dp";  // dp | exact | mc
  MassMethodSpec mass;
  int mc_trials = 1000000;
  std::optional<std::uint64_t> mc_seed;
  double detection_prob = 1.0;
};

struct PlanConfig {
  FieldOfView fov_template;
  AxisAlignedBox roi;
  int grid_resolution = 2;
  std::string algorithm = "dp";
  MassMethodSpec mass;
  int mc_trials = 1000000;
  std::optional<std::uint64_t> mc_seed;
  int phd_resolution = 101;
};

/// A parsed scenario file. Parsing is strict: unknown keys anywhere in the
/// document are rejected with an error naming the offending key.
struct Scenario {
  int version = 1;
  std::uint64_t seed = 0;
  SplitConfig split;
  std::optional<RfsModel> model;
  std::optional<FieldOfView> fov;
  std::optional<DemoConfig> demo;
  std::optional<CardinalityConfig> cardinality;
  std::optional<PlanConfig> plan;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace fovstat::cli
