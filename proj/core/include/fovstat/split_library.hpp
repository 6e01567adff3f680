#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fovstat/errors.hpp"

namespace fovstat {

/// Optimal parameters for approximating the univariate standard normal by a
/// symmetric mixture of `R` equal-variance Gaussians:
///   q(x) ~ sum_j weights[j] N(x; means[j], sigma^2)
/// minimizing J = L2(q, mixture) + lambda * sigma^2 with sum weights = 1.
///
/// Valid entries are exactly symmetric (weights[j] == weights[R-1-j] and
/// means[j] == -means[R-1-j] bitwise), have strictly increasing means, and
/// sigma in (0, 1).
struct SplitParameters {
  double lambda = 0.0;
  std::vector<double> weights;
  std::vector<double> means;
  double sigma = 1.0;
  double achieved_cost = 0.0;
  bool converged = false;

  int component_count() const { return static_cast<int>(weights.size()); }
};

/// Throws ValidationError if the entry violates the invariants above
/// (weight sum within 1e-12 of one, exact symmetry, ordering, sigma range).
void validate_split_parameters(const SplitParameters& params);

/// Cost J = L2(standard normal, split mixture) + lambda * sigma^2, with the
/// L2 term evaluated in closed form. Accepts arbitrary parameter structs so
/// baselines (e.g. the unsplit sigma = 1 entry) can be scored too.
double evaluate_cost(const SplitParameters& params, double lambda);

struct OptimizerSettings {
  int starts = 12;           // multi-start count, deterministic perturbations
  int max_iterations = 2000; // Nelder-Mead iterations per start
  double tolerance = 1e-11;  // simplex cost-spread stopping tolerance
  std::uint64_t seed = 0x5eedf00dull;
};

/// Optimizes the split parameters for (R, lambda) by seeded multi-start
/// Nelder-Mead descent on the symmetric parameterization. Deterministic for
/// fixed settings. If no start converges before the iteration cap, the best
/// parameters found are returned with converged = false.
SplitParameters generate_split(int component_count, double lambda,
                               const OptimizerSettings& settings = {});

struct LibraryProvenance {
  std::string generator = "fovstat gen-library";
  OptimizerSettings settings;
};

/// Precomputed split parameters keyed by (R, lambda).
class SplitLibrary {
public:
  /// Validates and stores an entry; replaces an existing (R, lambda) key.
  void insert(SplitParameters params);

  /// Lookup with exact component count required. A missing lambda falls back
  /// to the stored lambda nearest in log-scale; `exact_lambda`, when given,
  /// reports whether the match was exact so callers can warn.
  const SplitParameters& find(int component_count, double lambda,
                              bool* exact_lambda = nullptr) const;

  const std::vector<SplitParameters>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  LibraryProvenance provenance;

private:
  std::vector<SplitParameters> entries_;
};

/// Generates a library over the cross product of the requested component
/// counts and regularizer values. Entries for consecutive counts warm-start
/// from the previous solution so cost is non-increasing in R at fixed lambda.
SplitLibrary generate_library(const std::vector<int>& component_counts,
                              const std::vector<double>& lambdas,
                              const OptimizerSettings& settings = {});

/// Canonical JSON serialization; regeneration with identical settings yields
/// identical bytes.
std::string serialize_library(const SplitLibrary& lib);
void save_library(const SplitLibrary& lib, const std::filesystem::path& path);

/// Parses and validates a library file. Throws ValidationError on malformed
/// content or invariant violations.
SplitLibrary load_library(const std::filesystem::path& path);
SplitLibrary parse_library(const std::string& json_text);

}  // namespace fovstat
