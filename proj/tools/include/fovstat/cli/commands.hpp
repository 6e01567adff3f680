#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <vector>

#include "fovstat/cardinality.hpp"
#include "fovstat/cli/scenario.hpp"
#include "fovstat/planner.hpp"
#include "fovstat/split_library.hpp"

namespace fovstat::cli {

/// Generates the split library over the product of counts and regularizers
/// and writes it to `out_path`. Deterministic: regeneration with the same
/// settings is byte-identical.
void cmd_gen_library(const std::vector<int>& component_counts,
                     const std::vector<double>& lambdas,
                     const std::filesystem::path& out_path);

struct DemoStepRecord {
  int step = 0;
  double mass_inside_pre = 0.0;
  double retained_mass = 0.0;
  double mass_inside_post = 0.0;
  double normalization_error = 0.0;
  int components = 0;
  int splits_performed = 0;
  int depth_reached = 0;
};

/// Moving-object negative-information demo: per step, constant-velocity
/// propagation, FoV-driven refinement, non-detection update, optional
/// merge/prune. Writes masses.csv, per-step mixture JSON, and per-step
/// gridded density CSVs into out_dir.
std::vector<DemoStepRecord> cmd_partition_demo(const Scenario& scenario,
                                               std::shared_ptr<const SplitLibrary> library,
                                               const std::filesystem::path& out_dir);

/// FoV cardinality of the scenario model; writes pmf.csv / pmf.json into
/// out_dir and prints a table.
CardinalityPmf cmd_cardinality(const Scenario& scenario,
                               std::shared_ptr<const SplitLibrary> library,
                               const std::filesystem::path& out_dir, std::ostream& table_out);

/// Placement search over the scenario plan block; writes variance_map.csv,
/// best.json, and (for models with an intensity) phd_grid.csv into out_dir.
PlacementResult cmd_plan(const Scenario& scenario,
                         std::shared_ptr<const SplitLibrary> library,
                         const std::filesystem::path& out_dir);

}  // namespace fovstat::cli
