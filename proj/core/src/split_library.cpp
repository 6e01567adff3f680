#include "fovstat/split_library.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fovstat/gaussian.hpp"
#include "fovstat/rng.hpp"

namespace fovstat {

namespace {

using json = nlohmann::ordered_json;

GaussianMixture standard_normal_1d() {
  std::vector<GaussianComponent> c;
  c.emplace_back(1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  return GaussianMixture(std::move(c), 1);
}

GaussianMixture split_mixture_1d(const SplitParameters& p) {
  std::vector<GaussianComponent> c;
  c.reserve(p.weights.size());
  Eigen::MatrixXd var(1, 1);
  var(0, 0) = p.sigma * p.sigma;
  for (std::size_t j = 0; j < p.weights.size(); ++j) {
    Eigen::VectorXd m(1);
    m(0) = p.means[j];
    c.emplace_back(p.weights[j], m, var);
  }
  return GaussianMixture(std::move(c), 1);
}

// ---------------------------------------------------------------------------
// Symmetric parameterization
//
// Free vector t = [sigma logit, ln-increments of the positive means (P of
// them), weight-group logits (G-1 of them)] where P = R/2 pairs and
// G = P + (R odd ? 1 : 0) weight groups (the center, when present, is the
// pinned softmax reference).
// ---------------------------------------------------------------------------

int pair_count(int r) { return r / 2; }
int free_dim(int r) {
  const int groups = pair_count(r) + (r % 2);
  return 1 + pair_count(r) + (groups - 1);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

SplitParameters unpack(int r, const std::vector<double>& t, double lambda) {
  const int pairs = pair_count(r);
  const bool odd = (r % 2) != 0;
  const int groups = pairs + (odd ? 1 : 0);

  SplitParameters p;
  p.lambda = lambda;
  p.sigma = std::clamp(sigmoid(t[0]), 1e-8, 1.0 - 1e-15);

  std::vector<double> mu(pairs);
  double acc = 0.0;
  for (int k = 0; k < pairs; ++k) {
    acc += std::exp(std::clamp(t[1 + k], -40.0, 40.0));
    mu[k] = acc;
  }

  // Softmax over group logits; the last group (center when R is odd, the
  // outermost pair otherwise) is the pinned reference.
  std::vector<double> logits(groups, 0.0);
  for (int g = 0; g + 1 < groups; ++g) logits[g] = std::clamp(t[1 + pairs + g], -40.0, 40.0);
  const double lmax = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - lmax);
  std::vector<double> mass(groups);
  for (int g = 0; g < groups; ++g) mass[g] = std::exp(logits[g] - lmax) / z;

  // Materialize the full symmetric arrays; mirrored entries reuse the exact
  // same double so symmetry is bitwise.
  p.weights.resize(r);
  p.means.resize(r);
  for (int k = 0; k < pairs; ++k) {
    const double w = mass[k] / 2.0;
    const double m = mu[k];
    // index of the k-th inner pair: positions (pairs-1-k) from the center
    const int left = pairs - 1 - k;
    const int right = r - pairs + k;
    p.weights[left] = w;
    p.weights[right] = w;
    p.means[left] = -m;
    p.means[right] = m;
  }
  if (odd) {
    p.weights[pairs] = mass[groups - 1];
    p.means[pairs] = 0.0;
  }
  return p;
}

// Embeds a solved family into the next larger one (one extra component) as a
// warm start: even -> odd adds a light center, odd -> even replaces the
// center by a tight innermost pair.
SplitParameters embed_next(const SplitParameters& prev) {
  const int r_prev = prev.component_count();
  const int r = r_prev + 1;
  const int pairs_prev = pair_count(r_prev);
  const bool prev_odd = (r_prev % 2) != 0;

  std::vector<double> mu_prev(pairs_prev);
  std::vector<double> mass_prev(pairs_prev);
  for (int k = 0; k < pairs_prev; ++k) {
    mu_prev[k] = prev.means[r_prev - pairs_prev + k];
    mass_prev[k] = 2.0 * prev.weights[r_prev - pairs_prev + k];
  }

  std::vector<double> mu, mass;
  double center = 0.0;
  if (!prev_odd) {
    mu = mu_prev;
    center = 0.02;
    mass = mass_prev;
    for (double& m : mass) m *= 1.0 - center;
  } else {
    mu.push_back(0.35 * mu_prev.front());
    mu.insert(mu.end(), mu_prev.begin(), mu_prev.end());
    mass.push_back(std::max(prev.weights[pairs_prev], 1e-3));
    mass.insert(mass.end(), mass_prev.begin(), mass_prev.end());
  }

  SplitParameters e;
  e.lambda = prev.lambda;
  e.sigma = prev.sigma;
  const int p = pair_count(r);
  e.weights.assign(r, 0.0);
  e.means.assign(r, 0.0);
  for (int k = 0; k < p; ++k) {
    const double w = mass[k] / 2.0;
    e.weights[p - 1 - k] = w;
    e.weights[r - p + k] = w;
    e.means[p - 1 - k] = -mu[k];
    e.means[r - p + k] = mu[k];
  }
  if (r % 2) e.weights[p] = center;
  return e;
}

// Inverse of unpack for warm starts. The entry must be valid.
std::vector<double> pack(const SplitParameters& p) {
  const int r = p.component_count();
  const int pairs = pair_count(r);
  const bool odd = (r % 2) != 0;
  const int groups = pairs + (odd ? 1 : 0);

  std::vector<double> t(free_dim(r), 0.0);
  t[0] = logit(std::clamp(p.sigma, 1e-8, 1.0 - 1e-12));
  double prev = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const double m = p.means[r - pairs + k];
    t[1 + k] = std::log(std::max(m - prev, 1e-12));
    prev = m;
  }
  std::vector<double> mass(groups);
  for (int k = 0; k < pairs; ++k) mass[k] = 2.0 * p.weights[r - pairs + k];
  if (odd) mass[groups - 1] = p.weights[pairs];
  const double ref = std::max(mass[groups - 1], 1e-12);
  for (int g = 0; g + 1 < groups; ++g) {
    t[1 + pairs + g] = std::log(std::max(mass[g], 1e-12) / ref);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Nelder-Mead descent (deterministic)
// ---------------------------------------------------------------------------

struct DescentResult {
  std::vector<double> point;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
};

template <typename F>
DescentResult nelder_mead(F&& f, std::vector<double> x0, int max_iterations, double tolerance) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += 0.35;
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  DescentResult result;
  for (int it = 0; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    if (values[worst] - values[best] <= tolerance * (std::abs(values[best]) + tolerance)) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / static_cast<double>(n);
    }

    auto affine = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) {
        p[d] = centroid[d] + coeff * (simplex[worst][d] - centroid[d]);
      }
      return p;
    };

    const std::vector<double> reflected = affine(-1.0);
    const double fr = f(reflected);
    if (fr < values[order[0]]) {
      const std::vector<double> expanded = affine(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const std::vector<double> contracted = affine(fr < values[worst] ? -0.5 : 0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d) {
            simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
          }
          values[i] = f(simplex[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (values[i] < values[best]) best = i;
  }
  result.point = simplex[best];
  result.value = values[best];
  return result;
}

std::vector<double> heuristic_start(int r) {
  std::vector<double> t(free_dim(r), 0.0);
  t[0] = logit(0.55);
  const int pairs = pair_count(r);
  for (int k = 0; k < pairs; ++k) t[1 + k] = std::log(0.9);
  return t;
}

SplitParameters optimize(int r, double lambda, const OptimizerSettings& settings,
                         const SplitParameters* warm_start) {
  if (r < 2 || r > 9) {
    throw ValidationError("split component count must be in [2, 9]");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("split regularizer lambda must be positive and finite");
  }

  auto cost = [&](const std::vector<double>& t) {
    return evaluate_cost(unpack(r, t, lambda), lambda);
  };

  // Warm starts must live in this R's parameter space; an adjacent smaller
  // family is embedded, anything else is ignored.
  std::vector<double> warm;
  if (warm_start != nullptr) {
    if (warm_start->component_count() == r) {
      warm = pack(*warm_start);
    } else if (warm_start->component_count() + 1 == r) {
      warm = pack(embed_next(*warm_start));
    }
  }

  const std::vector<double> base = heuristic_start(r);
  DescentResult best;
  for (int s = 0; s < settings.starts; ++s) {
    std::vector<double> x0 = base;
    if (s == 1 && !warm.empty()) {
      x0 = warm;
    } else if (s > 0) {
      CounterRng rng(settings.seed, static_cast<std::uint64_t>(s));
      for (auto& v : x0) v += 0.8 * rng.normal();
    }
    DescentResult run = nelder_mead(cost, std::move(x0), settings.max_iterations,
                                    settings.tolerance);
    if (run.value < best.value) best = run;
  }

  SplitParameters params = unpack(r, best.point, lambda);
  params.achieved_cost = best.value;
  params.converged = best.converged;
  validate_split_parameters(params);
  return params;
}

}  // namespace

void validate_split_parameters(const SplitParameters& params) {
  const int r = params.component_count();
  if (r < 2) {
    throw ValidationError("split entry requires at least two components");
  }
  if (params.means.size() != params.weights.size()) {
    throw ValidationError("split entry weights/means size mismatch");
  }
  if (!(params.lambda > 0.0)) {
    throw ValidationError("split entry lambda must be positive");
  }
  double sum = 0.0;
  for (double w : params.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("split weights must be finite and nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("split weights must sum to one within 1e-12");
  }
  for (int j = 0; j < r; ++j) {
    if (params.weights[j] != params.weights[r - 1 - j] ||
        params.means[j] != -params.means[r - 1 - j]) {
      throw ValidationError("split entry must be exactly symmetric");
    }
  }
  for (int j = 0; j + 1 < r; ++j) {
    if (!(params.means[j] < params.means[j + 1])) {
      throw ValidationError("split means must be strictly increasing");
    }
  }
  if (!(params.sigma > 0.0) || !(params.sigma < 1.0)) {
    throw ValidationError("split sigma must lie in (0, 1)");
  }
  if (!std::isfinite(params.achieved_cost)) {
    throw ValidationError("split achieved_cost must be finite");
  }
}

double evaluate_cost(const SplitParameters& params, double lambda) {
  const double l2 = l2_distance(standard_normal_1d(), split_mixture_1d(params));
  return l2 + lambda * params.sigma * params.sigma;
}

SplitParameters generate_split(int component_count, double lambda,
                               const OptimizerSettings& settings) {
  return optimize(component_count, lambda, settings, nullptr);
}

void SplitLibrary::insert(SplitParameters params) {
  validate_split_parameters(params);
  for (auto& e : entries_) {
    if (e.component_count() == params.component_count() && e.lambda == params.lambda) {
      e = std::move(params);
      return;
    }
  }
  entries_.push_back(std::move(params));
}

const SplitParameters& SplitLibrary::find(int component_count, double lambda,
                                          bool* exact_lambda) const {
  if (!(lambda > 0.0)) {
    throw ValidationError("library lookup requires lambda > 0");
  }
  const SplitParameters* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& e : entries_) {
    if (e.component_count() != component_count) continue;
    const double dist = std::abs(std::log(e.lambda) - std::log(lambda));
    if (dist < best_dist || (dist == best_dist && best != nullptr && e.lambda < best->lambda)) {
      best = &e;
      best_dist = dist;
    }
  }
  if (best == nullptr) {
    throw ValidationError("split library has no entry with R = " +
                          std::to_string(component_count));
  }
  if (exact_lambda != nullptr) *exact_lambda = (best->lambda == lambda);
  return *best;
}

SplitLibrary generate_library(const std::vector<int>& component_counts,
                              const std::vector<double>& lambdas,
                              const OptimizerSettings& settings) {
  std::vector<int> counts = component_counts;
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  std::vector<double> ls = lambdas;
  std::sort(ls.begin(), ls.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());

  SplitLibrary lib;
  lib.provenance.settings = settings;
  for (double lambda : ls) {
    const SplitParameters* previous = nullptr;
    SplitParameters last;
    for (int r : counts) {
      last = optimize(r, lambda, settings, previous);
      lib.insert(last);
      previous = &last;
    }
  }
  return lib;
}

std::string serialize_library(const SplitLibrary& lib) {
  json doc;
  doc["version"] = 1;
  doc["provenance"] = {
      {"generator", lib.provenance.generator},
      {"optimizer",
       {{"starts", lib.provenance.settings.starts},
        {"max_iterations", lib.provenance.settings.max_iterations},
        {"tolerance", lib.provenance.settings.tolerance},
        {"seed", lib.provenance.settings.seed}}},
  };

  std::vector<const SplitParameters*> sorted;
  for (const auto& e : lib.entries()) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    if (a->component_count() != b->component_count()) {
      return a->component_count() < b->component_count();
    }
    return a->lambda < b->lambda;
  });

  doc["entries"] = json::array();
  for (const auto* e : sorted) {
    doc["entries"].push_back({{"R", e->component_count()},
                              {"lambda", e->lambda},
                              {"weights", e->weights},
                              {"means", e->means},
                              {"sigma", e->sigma},
                              {"achieved_cost", e->achieved_cost},
                              {"converged", e->converged}});
  }
  return doc.dump(2) + "\n";
}

void save_library(const SplitLibrary& lib, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot open library file for writing: " + path.string());
  }
  out << serialize_library(lib);
}

SplitLibrary parse_library(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("library parse failure: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != 1) {
      throw ValidationError("unsupported library version");
    }
    SplitLibrary lib;
    if (doc.contains("provenance")) {
      const auto& prov = doc.at("provenance");
      lib.provenance.generator = prov.value("generator", std::string());
      if (prov.contains("optimizer")) {
        const auto& opt = prov.at("optimizer");
        lib.provenance.settings.starts = opt.value("starts", lib.provenance.settings.starts);
        lib.provenance.settings.max_iterations =
            opt.value("max_iterations", lib.provenance.settings.max_iterations);
        lib.provenance.settings.tolerance =
            opt.value("tolerance", lib.provenance.settings.tolerance);
        lib.provenance.settings.seed = opt.value("seed", lib.provenance.settings.seed);
      }
    }
    for (const auto& entry : doc.at("entries")) {
      SplitParameters p;
      p.lambda = entry.at("lambda").get<double>();
      p.weights = entry.at("weights").get<std::vector<double>>();
      p.means = entry.at("means").get<std::vector<double>>();
      p.sigma = entry.at("sigma").get<double>();
      p.achieved_cost = entry.at("achieved_cost").get<double>();
      p.converged = entry.at("converged").get<bool>();
      if (entry.at("R").get<int>() != p.component_count()) {
        throw ValidationError("library entry R does not match its weights length");
      }
      lib.insert(std::move(p));  // insert() validates invariants
    }
    return lib;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("library content invalid: ") + e.what());
  }
}

SplitLibrary load_library(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open library file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_library(buffer.str());
}

}  // namespace fovstat
