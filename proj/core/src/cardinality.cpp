#include "fovstat/cardinality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fovstat/rng.hpp"

namespace fovstat {

namespace {

void require_detection_prob(double p) {
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw ValidationError("detection probability must lie in [0, 1]");
  }
}

std::vector<double> poisson_terms(double mu, int n_max) {
  std::vector<double> p(n_max + 1, 0.0);
  p[0] = std::exp(-mu);
  for (int n = 1; n <= n_max; ++n) p[n] = p[n - 1] * mu / static_cast<double>(n);
  return p;
}

int poisson_truncation(double mu) {
  return static_cast<int>(std::ceil(mu + 10.0 * std::sqrt(mu) + 20.0));
}

/// Binomial pmf value P(X = n), X ~ Binomial(m, q). Direct products up to
/// m = 50, log space beyond.
double binomial_term(int n, int m, double q) {
  if (n < 0 || n > m) return 0.0;
  if (q <= 0.0) return n == 0 ? 1.0 : 0.0;
  if (q >= 1.0) return n == m ? 1.0 : 0.0;
  if (m <= 50) {
    double coeff = 1.0;
    for (int i = 0; i < n; ++i) {
      coeff *= static_cast<double>(m - i) / static_cast<double>(i + 1);
    }
    return coeff * std::pow(q, n) * std::pow(1.0 - q, m - n);
  }
  const double log_coeff =
      std::lgamma(m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m - n + 1.0);
  return std::exp(log_coeff + n * std::log(q) + (m - n) * std::log1p(-q));
}

double poisson_mass(const PoissonRfs& model, const FieldOfView& fov,
                    const FovMassMethod& mass_method, double detection_prob) {
  const double total = model.mean_cardinality();
  if (total == 0.0) return 0.0;
  const double q = fov_mass(normalize(model.intensity()), fov, mass_method);
  return detection_prob * q * total;
}

}  // namespace

PmfMoments pmf_moments(const CardinalityPmf& pmf) {
  if (pmf.probabilities.empty()) {
    throw ValidationError("pmf_moments requires a nonempty pmf");
  }
  double mean = 0.0;
  for (std::size_t n = 0; n < pmf.probabilities.size(); ++n) {
    mean += static_cast<double>(n) * pmf.probabilities[n];
  }
  double variance = 0.0;
  for (std::size_t n = 0; n < pmf.probabilities.size(); ++n) {
    const double d = static_cast<double>(n) - mean;
    variance += d * d * pmf.probabilities[n];
  }
  return {mean, variance};
}

double void_probability(const CardinalityPmf& pmf) {
  if (pmf.probabilities.empty()) {
    throw ValidationError("void_probability requires a nonempty pmf");
  }
  return pmf.probabilities[0];
}

CardinalityPmf poisson_binomial_pmf(const std::vector<double>& success_probs) {
  std::vector<double> probs{1.0};
  probs.reserve(success_probs.size() + 1);
  for (double p : success_probs) {
    if (!(p >= 0.0) || !(p <= 1.0)) {
      throw ValidationError("Poisson-binomial success probabilities must lie in [0, 1]");
    }
    std::vector<double> next(probs.size() + 1, 0.0);
    for (std::size_t n = 0; n < probs.size(); ++n) {
      next[n] += probs[n] * (1.0 - p);
      next[n + 1] += probs[n] * p;
    }
    probs = std::move(next);
  }
  return {std::move(probs), "poisson-binomial", -1};
}

CardinalityPmf poisson_fov_pmf_truncated(const PoissonRfs& model, const FieldOfView& fov,
                                         const FovMassMethod& mass_method,
                                         double detection_prob) {
  require_detection_prob(detection_prob);
  const double total = model.mean_cardinality();
  const double mu = poisson_mass(model, fov, mass_method, detection_prob);
  const double nu = std::max(total - mu, 0.0);

  const int n_max = poisson_truncation(mu);
  // Upper summation bound: past it the complement series contributes less
  // than 1e-12 of mass.
  const int m_max = n_max + poisson_truncation(nu) + 10;

  CardinalityPmf pmf;
  pmf.method = "poisson-truncated-series";
  pmf.truncation = m_max;
  pmf.probabilities.assign(n_max + 1, 0.0);

  const double log_mu = mu > 0.0 ? std::log(mu) : 0.0;
  const double log_nu = nu > 0.0 ? std::log(nu) : 0.0;
  for (int n = 0; n <= n_max; ++n) {
    if (mu == 0.0 && n > 0) break;
    double sum = 0.0;
    for (int m = n; m <= m_max; ++m) {
      const int k = m - n;
      if (nu == 0.0 && k > 0) break;
      const double log_term = -total + n * log_mu + k * log_nu -
                              std::lgamma(n + 1.0) - std::lgamma(k + 1.0);
      sum += std::exp(log_term);
    }
    pmf.probabilities[n] = sum;
  }
  return pmf;
}

CardinalityPmf poisson_fov_pmf(const PoissonRfs& model, const FieldOfView& fov,
                               const FovMassMethod& mass_method, double detection_prob) {
  require_detection_prob(detection_prob);
  const double mu = poisson_mass(model, fov, mass_method, detection_prob);
  const int n_max = poisson_truncation(mu);

  CardinalityPmf collapsed;
  collapsed.method = "poisson";
  collapsed.truncation = n_max;
  collapsed.probabilities = poisson_terms(mu, n_max);

  // The double series collapses to a Poisson pmf with rate mu; both routes
  // are evaluated and cross-checked before the collapsed form is returned.
  const CardinalityPmf audit = poisson_fov_pmf_truncated(model, fov, mass_method,
                                                         detection_prob);
  const std::size_t common =
      std::min(audit.probabilities.size(), collapsed.probabilities.size());
  for (std::size_t n = 0; n < common; ++n) {
    if (std::abs(audit.probabilities[n] - collapsed.probabilities[n]) > 1e-10) {
      throw std::logic_error(
          "Poisson FoV cardinality: series and collapsed forms disagree beyond 1e-10");
    }
  }
  return collapsed;
}

CardinalityPmf iidc_fov_pmf(const IidcRfs& model, const FieldOfView& fov,
                            const FovMassMethod& mass_method, double detection_prob) {
  require_detection_prob(detection_prob);
  const double q =
      std::clamp(detection_prob * fov_mass(model.spatial(), fov, mass_method), 0.0, 1.0);
  const int m_max = model.max_cardinality();

  CardinalityPmf pmf;
  pmf.method = "iidc";
  pmf.probabilities.assign(m_max + 1, 0.0);
  for (int n = 0; n <= m_max; ++n) {
    double sum = 0.0;
    for (int m = n; m <= m_max; ++m) {
      sum += model.cardinality()[m] * binomial_term(n, m, q);
    }
    pmf.probabilities[n] = sum;
  }
  return pmf;
}

std::vector<double> mb_fov_masses(const MultiBernoulli& model, const FieldOfView& fov,
                                  const FovMassMethod& mass_method) {
  std::vector<double> masses(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    masses[i] = fov_mass(model.components()[i].density, fov,
                         per_component_method(mass_method, i));
  }
  return masses;
}

namespace {

CardinalityPmf mb_pmf_exhaustive(const MultiBernoulli& model, const std::vector<double>& masses,
                                 double detection_prob) {
  const int m = static_cast<int>(model.size());
  if (m > 14) {
    throw ValidationError(
        "exhaustive MB enumeration is limited to M <= 14; use the dp method");
  }

  double prefactor = 1.0;
  std::vector<double> inside(m), outside(m);
  for (int i = 0; i < m; ++i) {
    const double r = model.components()[i].existence;
    const double q = std::clamp(detection_prob * masses[i], 0.0, 1.0);
    prefactor *= 1.0 - r;
    inside[i] = r * q / (1.0 - r);
    outside[i] = r * (1.0 - q) / (1.0 - r);
  }

  // Depth-first walk over the ternary assignment of every index to
  // inside / outside / nonexistent, accumulating the running product.
  std::vector<double> probs(m + 1, 0.0);
  auto walk = [&](auto&& self, int index, int inside_count, double product) -> void {
    if (index == m) {
      probs[inside_count] += product;
      return;
    }
    self(self, index + 1, inside_count + 1, product * inside[index]);
    self(self, index + 1, inside_count, product * outside[index]);
    self(self, index + 1, inside_count, product);
  };
  walk(walk, 0, 0, 1.0);

  for (double& p : probs) p *= prefactor;
  return {std::move(probs), "mb-exhaustive", -1};
}

CardinalityPmf mb_pmf_dp(const MultiBernoulli& model, const std::vector<double>& masses,
                         double detection_prob) {
  std::vector<double> success(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    success[i] = std::clamp(
        model.components()[i].existence * detection_prob * masses[i], 0.0, 1.0);
  }
  CardinalityPmf pmf = poisson_binomial_pmf(success);
  pmf.method = "mb-dp";
  return pmf;
}

CardinalityPmf mb_pmf_stochastic(const MultiBernoulli& model, const std::vector<double>& masses,
                                 int trial_count, std::uint64_t seed, double detection_prob) {
  if (trial_count < 1) {
    throw ValidationError("stochastic MB cardinality requires at least one trial");
  }
  const int m = static_cast<int>(model.size());
  std::vector<double> success(m);
  for (int i = 0; i < m; ++i) {
    success[i] = std::clamp(
        model.components()[i].existence * detection_prob * masses[i], 0.0, 1.0);
  }

  std::vector<std::int64_t> tally(m + 1, 0);
  for (int j = 0; j < trial_count; ++j) {
    CounterRng rng(seed, static_cast<std::uint64_t>(j));
    int count = 0;
    for (int i = 0; i < m; ++i) {
      const double u = rng.uniform();
      count += (success[i] >= u) ? 1 : 0;
    }
    ++tally[count];
  }

  CardinalityPmf pmf;
  pmf.method = "mb-mc";
  pmf.probabilities.resize(m + 1);
  for (int n = 0; n <= m; ++n) {
    pmf.probabilities[n] =
        static_cast<double>(tally[n]) / static_cast<double>(trial_count);
  }
  return pmf;
}

}  // namespace

CardinalityPmf mb_pmf_from_masses(const MultiBernoulli& model,
                                  const std::vector<double>& masses,
                                  const PmfOptions& options) {
  require_detection_prob(options.detection_prob);
  if (masses.size() != model.size()) {
    throw ValidationError("mb_pmf_from_masses requires one mass per component");
  }
  switch (options.algorithm) {
    case PmfOptions::Algorithm::exact:
      return mb_pmf_exhaustive(model, masses, options.detection_prob);
    case PmfOptions::Algorithm::mc:
      return mb_pmf_stochastic(model, masses, options.mc_trials, options.mc_seed,
                               options.detection_prob);
    case PmfOptions::Algorithm::production:
      break;
  }
  return mb_pmf_dp(model, masses, options.detection_prob);
}

CardinalityPmf mb_fov_pmf_exact(const MultiBernoulli& model, const FieldOfView& fov,
                                const FovMassMethod& mass_method, double detection_prob) {
  require_detection_prob(detection_prob);
  return mb_pmf_exhaustive(model, mb_fov_masses(model, fov, mass_method), detection_prob);
}

CardinalityPmf mb_fov_pmf_dp(const MultiBernoulli& model, const FieldOfView& fov,
                             const FovMassMethod& mass_method, double detection_prob) {
  require_detection_prob(detection_prob);
  return mb_pmf_dp(model, mb_fov_masses(model, fov, mass_method), detection_prob);
}

CardinalityPmf mb_fov_pmf_mc(const MultiBernoulli& model, const FieldOfView& fov,
                             const FovMassMethod& mass_method, int trial_count,
                             std::uint64_t seed, double detection_prob) {
  require_detection_prob(detection_prob);
  return mb_pmf_stochastic(model, mb_fov_masses(model, fov, mass_method), trial_count, seed,
                           detection_prob);
}

CardinalityPmf glmb_fov_pmf(const GlmbDistribution& model, const FieldOfView& fov,
                            const FovMassMethod& mass_method, double detection_prob) {
  require_detection_prob(detection_prob);
  std::size_t n_max = 0;
  for (const auto& c : model.components()) n_max = std::max(n_max, c.labels.size());

  CardinalityPmf pmf;
  pmf.method = "glmb";
  pmf.probabilities.assign(n_max + 1, 0.0);
  for (std::size_t ci = 0; ci < model.size(); ++ci) {
    const auto& component = model.components()[ci];
    const FovMassMethod component_method = per_component_method(mass_method, ci);
    std::vector<double> success(component.labels.size());
    for (std::size_t li = 0; li < component.labels.size(); ++li) {
      const double q = fov_mass(component.densities[li], fov,
                                per_component_method(component_method, li));
      success[li] = std::clamp(detection_prob * q, 0.0, 1.0);
    }
    const CardinalityPmf inner = poisson_binomial_pmf(success);
    for (std::size_t n = 0; n < inner.probabilities.size(); ++n) {
      pmf.probabilities[n] += component.weight * inner.probabilities[n];
    }
  }
  return pmf;
}

CardinalityPmf fov_cardinality_pmf(const RfsModel& model, const FieldOfView& fov,
                                   const FovMassMethod& mass_method,
                                   const PmfOptions& options) {
  using Algorithm = PmfOptions::Algorithm;
  // Only the MB family has a stochastic path; the other families' production
  // computations are already exact, so `exact` aliases `production` there.
  if (options.algorithm == Algorithm::mc &&
      !std::holds_alternative<MultiBernoulli>(model)) {
    throw ValidationError("the mc cardinality algorithm applies to multi-Bernoulli models only");
  }
  return std::visit(
      [&](const auto& m) -> CardinalityPmf {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PoissonRfs>) {
          return poisson_fov_pmf(m, fov, mass_method, options.detection_prob);
        } else if constexpr (std::is_same_v<T, IidcRfs>) {
          return iidc_fov_pmf(m, fov, mass_method, options.detection_prob);
        } else if constexpr (std::is_same_v<T, MultiBernoulli>) {
          return mb_pmf_from_masses(m, mb_fov_masses(m, fov, mass_method), options);
        } else {
          return glmb_fov_pmf(m, fov, mass_method, options.detection_prob);
        }
      },
      model);
}

CardinalityPmf detection_count_pmf(const RfsModel& model, const FieldOfView& fov,
                                   double detection_prob, const FovMassMethod& mass_method) {
  PmfOptions options;
  options.detection_prob = detection_prob;
  return fov_cardinality_pmf(model, fov, mass_method, options);
}

}  // namespace fovstat
