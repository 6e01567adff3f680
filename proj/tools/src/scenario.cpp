#include "fovstat/cli/scenario.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fovstat::cli {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw ValidationError("unknown key '" + item.key() + "' in '" + where + "'");
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ValidationError("missing key '" + std::string(key) + "' in '" + where + "'");
  }
  return obj.at(key);
}

double parse_number(const json& value, const std::string& where) {
  if (value.is_number()) return value.get<double>();
  // JSON has no infinity literal; accept "inf"/"-inf" strings for
  // half-space box bounds.
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("'" + where + "' must be a number (or \"inf\"/\"-inf\")");
}

Eigen::VectorXd parse_vector(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) {
    throw ValidationError("'" + where + "' must be a nonempty array of numbers");
  }
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = parse_number(arr[i], where);
  return v;
}

Eigen::MatrixXd parse_matrix(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty() || !arr[0].is_array()) {
    throw ValidationError("'" + where + "' must be an array of arrays of numbers");
  }
  const std::size_t rows = arr.size();
  const std::size_t cols = arr[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (arr[r].size() != cols) {
      throw ValidationError("'" + where + "' rows must have equal lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = arr[r][c].get<double>();
  }
  return m;
}

GaussianMixture parse_mixture(const json& obj, const std::string& where) {
  check_keys(obj, {"position_dim", "components"}, where);
  const int np = require(obj, "position_dim", where).get<int>();
  const json& comps = require(obj, "components", where);
  if (!comps.is_array() || comps.empty()) {
    throw ValidationError("'" + where + ".components' must be a nonempty array");
  }
  std::vector<GaussianComponent> out;
  out.reserve(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const json& c = comps[i];
    const std::string cw = where + ".components[" + std::to_string(i) + "]";
    check_keys(c, {"weight", "mean", "covariance"}, cw);
    out.emplace_back(require(c, "weight", cw).get<double>(),
                     parse_vector(require(c, "mean", cw), cw + ".mean"),
                     parse_matrix(require(c, "covariance", cw), cw + ".covariance"));
  }
  return GaussianMixture(std::move(out), np);
}

AxisAlignedBox parse_box_fields(const json& obj, const std::string& where) {
  return AxisAlignedBox{parse_vector(require(obj, "lo", where), where + ".lo"),
                        parse_vector(require(obj, "hi", where), where + ".hi")};
}

FieldOfView parse_fov(const json& obj, const std::string& where) {
  const std::string type = require(obj, "type", where).get<std::string>();
  if (type == "box") {
    check_keys(obj, {"type", "lo", "hi"}, where);
    return FieldOfView(parse_box_fields(obj, where));
  }
  if (type == "polytope") {
    check_keys(obj, {"type", "normals", "offsets"}, where);
    return FieldOfView(
        ConvexPolytope{parse_matrix(require(obj, "normals", where), where + ".normals"),
                       parse_vector(require(obj, "offsets", where), where + ".offsets")});
  }
  if (type == "ball") {
    check_keys(obj, {"type", "center", "radius"}, where);
    return FieldOfView(Ball{parse_vector(require(obj, "center", where), where + ".center"),
                            require(obj, "radius", where).get<double>()});
  }
  throw ValidationError("unknown FoV type '" + type + "' in '" + where + "'");
}

RfsModel parse_model(const json& obj, const std::string& where) {
  const std::string type = require(obj, "type", where).get<std::string>();
  if (type == "poisson") {
    check_keys(obj, {"type", "intensity"}, where);
    return PoissonRfs(parse_mixture(require(obj, "intensity", where), where + ".intensity"));
  }
  if (type == "iidc") {
    check_keys(obj, {"type", "cardinality", "spatial"}, where);
    const json& card = require(obj, "cardinality", where);
    if (!card.is_array() || card.empty()) {
      throw ValidationError("'" + where + ".cardinality' must be a nonempty array");
    }
    return IidcRfs(card.get<std::vector<double>>(),
                   parse_mixture(require(obj, "spatial", where), where + ".spatial"));
  }
  if (type == "multi_bernoulli") {
    check_keys(obj, {"type", "components"}, where);
    const json& comps = require(obj, "components", where);
    std::vector<BernoulliComponent> out;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string cw = where + ".components[" + std::to_string(i) + "]";
      check_keys(comps[i], {"existence", "density"}, cw);
      out.push_back({require(comps[i], "existence", cw).get<double>(),
                     parse_mixture(require(comps[i], "density", cw), cw + ".density")});
    }
    return MultiBernoulli(std::move(out));
  }
  if (type == "glmb") {
    check_keys(obj, {"type", "components"}, where);
    const json& comps = require(obj, "components", where);
    std::vector<GlmbComponent> out;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string cw = where + ".components[" + std::to_string(i) + "]";
      check_keys(comps[i], {"weight", "labels", "densities"}, cw);
      GlmbComponent gc;
      gc.weight = require(comps[i], "weight", cw).get<double>();
      gc.labels = require(comps[i], "labels", cw).get<std::vector<int>>();
      for (const auto& d : require(comps[i], "densities", cw)) {
        gc.densities.push_back(parse_mixture(d, cw + ".densities"));
      }
      out.push_back(std::move(gc));
    }
    return GlmbDistribution(std::move(out));
  }
  if (type == "mb_scenario") {
    check_keys(obj, {"type", "count", "roi", "existence_range", "covariance", "seed"}, where);
    const json& roi = require(obj, "roi", where);
    check_keys(roi, {"lo", "hi"}, where + ".roi");
    const json& range = require(obj, "existence_range", where);
    if (!range.is_array() || range.size() != 2) {
      throw ValidationError("'" + where + ".existence_range' must be [lo, hi]");
    }
    CovarianceSpec spec;
    const json& cov = require(obj, "covariance", where);
    check_keys(cov, {"eigenvalue_min", "eigenvalue_max"}, where + ".covariance");
    spec.eigenvalue_min = require(cov, "eigenvalue_min", where).get<double>();
    spec.eigenvalue_max = require(cov, "eigenvalue_max", where).get<double>();
    return sample_mb_scenario(require(obj, "count", where).get<int>(),
                              parse_box_fields(roi, where + ".roi"),
                              {range[0].get<double>(), range[1].get<double>()}, spec,
                              require(obj, "seed", where).get<std::uint64_t>());
  }
  throw ValidationError("unknown model type '" + type + "' in '" + where + "'");
}

SplitConfig parse_split(const json& obj) {
  check_keys(obj,
             {"min_weight", "split_count", "lambda", "grid_halfwidth", "grid_points",
              "max_depth"},
             "split");
  SplitConfig cfg;
  cfg.min_weight = obj.value("min_weight", cfg.min_weight);
  cfg.split_count = obj.value("split_count", cfg.split_count);
  cfg.lambda = obj.value("lambda", cfg.lambda);
  cfg.grid_halfwidth = obj.value("grid_halfwidth", cfg.grid_halfwidth);
  cfg.grid_points = obj.value("grid_points", cfg.grid_points);
  cfg.max_depth = obj.value("max_depth", cfg.max_depth);
  return cfg;
}

MassMethodSpec parse_mass_spec(const json& obj, const std::string& where) {
  check_keys(obj, {"type", "samples", "seed"}, where);
  MassMethodSpec spec;
  const std::string type = require(obj, "type", where).get<std::string>();
  if (type == "partition_weights") {
    spec.kind = MassMethodSpec::Kind::partition_weights;
  } else if (type == "monte_carlo") {
    spec.kind = MassMethodSpec::Kind::monte_carlo;
  } else if (type == "exact_box_diagonal") {
    spec.kind = MassMethodSpec::Kind::exact_box_diagonal;
  } else {
    throw ValidationError("unknown mass method '" + type + "' in '" + where + "'");
  }
  if (obj.contains("samples")) spec.samples = obj.at("samples").get<int>();
  if (obj.contains("seed")) spec.seed = obj.at("seed").get<std::uint64_t>();
  return spec;
}

DemoConfig parse_demo(const json& obj) {
  check_keys(obj,
             {"initial", "dt", "steps", "process_noise", "detection_prob",
              "prune_threshold", "merge_threshold", "density_grid", "density_resolution"},
             "demo");
  DemoConfig demo;
  demo.initial = parse_mixture(require(obj, "initial", "demo"), "demo.initial");
  demo.dt = obj.value("dt", demo.dt);
  demo.steps = obj.value("steps", demo.steps);
  demo.process_noise = obj.value("process_noise", demo.process_noise);
  demo.detection_prob = obj.value("detection_prob", demo.detection_prob);
  demo.prune_threshold = obj.value("prune_threshold", demo.prune_threshold);
  demo.merge_threshold = obj.value("merge_threshold", demo.merge_threshold);
  if (obj.contains("density_grid")) {
    check_keys(obj.at("density_grid"), {"lo", "hi"}, "demo.density_grid");
    demo.density_grid = parse_box_fields(obj.at("density_grid"), "demo.density_grid");
  }
  demo.density_resolution = obj.value("density_resolution", demo.density_resolution);
  return demo;
}

CardinalityConfig parse_cardinality(const json& obj) {
  check_keys(obj, {"algorithm", "mass", "mc_trials", "mc_seed", "detection_prob"},
             "cardinality");
  CardinalityConfig cfg;
  cfg.algorithm = obj.value("algorithm", cfg.algorithm);
  if (obj.contains("mass")) cfg.mass = parse_mass_spec(obj.at("mass"), "cardinality.mass");
  cfg.mc_trials = obj.value("mc_trials", cfg.mc_trials);
  if (obj.contains("mc_seed")) cfg.mc_seed = obj.at("mc_seed").get<std::uint64_t>();
  cfg.detection_prob = obj.value("detection_prob", cfg.detection_prob);
  return cfg;
}

PlanConfig parse_plan(const json& obj) {
  check_keys(obj,
             {"fov", "roi", "grid_resolution", "algorithm", "mass", "mc_trials", "mc_seed",
              "phd_resolution"},
             "plan");
  const json& roi = require(obj, "roi", "plan");
  check_keys(roi, {"lo", "hi"}, "plan.roi");
  PlanConfig plan{parse_fov(require(obj, "fov", "plan"), "plan.fov"),
                  parse_box_fields(roi, "plan.roi"),
                  2,
                  "dp",
                  MassMethodSpec{},
                  1000000,
                  std::nullopt,
                  101};
  plan.grid_resolution = obj.value("grid_resolution", plan.grid_resolution);
  plan.algorithm = obj.value("algorithm", plan.algorithm);
  if (obj.contains("mass")) plan.mass = parse_mass_spec(obj.at("mass"), "plan.mass");
  plan.mc_trials = obj.value("mc_trials", plan.mc_trials);
  if (obj.contains("mc_seed")) plan.mc_seed = obj.at("mc_seed").get<std::uint64_t>();
  plan.phd_resolution = obj.value("phd_resolution", plan.phd_resolution);
  return plan;
}

}  // namespace

FovMassMethod make_mass_method(const MassMethodSpec& spec, const SplitConfig& split,
                               std::shared_ptr<const SplitLibrary> library,
                               std::uint64_t default_seed) {
  switch (spec.kind) {
    case MassMethodSpec::Kind::partition_weights:
      if (library == nullptr) {
        throw ValidationError("partition-weights mass method requires a split library");
      }
      return PartitionWeightsMethod{split, std::move(library)};
    case MassMethodSpec::Kind::monte_carlo:
      return MonteCarloMethod{spec.samples, spec.seed.value_or(default_seed)};
    case MassMethodSpec::Kind::exact_box_diagonal:
      return ExactBoxDiagonalMethod{};
  }
  throw ValidationError("unhandled mass method kind");
}

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario parse failure: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError("scenario must be a JSON object");
  }
  check_keys(doc, {"version", "seed", "split", "model", "fov", "demo", "cardinality", "plan"},
             "scenario");

  Scenario s;
  try {
    s.version = require(doc, "version", "scenario").get<int>();
    if (s.version != 1) {
      throw ValidationError("unsupported scenario version " + std::to_string(s.version));
    }
    if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("split")) s.split = parse_split(doc.at("split"));
    if (doc.contains("model")) s.model = parse_model(doc.at("model"), "model");
    if (doc.contains("fov")) s.fov = parse_fov(doc.at("fov"), "fov");
    if (doc.contains("demo")) s.demo = parse_demo(doc.at("demo"));
    if (doc.contains("cardinality")) s.cardinality = parse_cardinality(doc.at("cardinality"));
    if (doc.contains("plan")) s.plan = parse_plan(doc.at("plan"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario content invalid: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open scenario file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace fovstat::cli
