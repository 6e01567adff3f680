#include <CLI11.hpp>
#include <iostream>
#include <memory>

#include "fovstat/cli/commands.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitContradiction = 3;

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir;
  std::string library_path = "data/split_library.json";
  std::string method;
  int samples = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out) {
  cmd->add_option("--scenario", args.scenario_path, "Scenario JSON file")->required();
  auto* out = cmd->add_option("--out", args.out_dir, "Output directory");
  if (needs_out) out->required();
  cmd->add_option("--library", args.library_path, "Split library JSON file");
  cmd->add_option("--method", args.method, "Cardinality algorithm: dp, exact, or mc");
  cmd->add_option("--samples", args.samples, "Monte Carlo trial count override");
  cmd->add_option("--seed", args.seed, "Seed override")->each([&args](const std::string&) {
    args.seed_set = true;
  });
}

fovstat::cli::Scenario load_with_overrides(const CommonArgs& args) {
  fovstat::cli::Scenario scenario = fovstat::cli::load_scenario(args.scenario_path);
  if (args.seed_set) scenario.seed = args.seed;
  if (!args.method.empty()) {
    if (scenario.cardinality.has_value()) scenario.cardinality->algorithm = args.method;
    if (scenario.plan.has_value()) scenario.plan->algorithm = args.method;
    if (!scenario.cardinality.has_value() && !scenario.plan.has_value()) {
      fovstat::cli::CardinalityConfig config;
      config.algorithm = args.method;
      scenario.cardinality = config;
    }
  }
  if (args.samples > 0) {
    if (scenario.cardinality.has_value()) scenario.cardinality->mc_trials = args.samples;
    if (scenario.plan.has_value()) scenario.plan->mc_trials = args.samples;
  }
  return scenario;
}

std::shared_ptr<const fovstat::SplitLibrary> load_library_if_present(const CommonArgs& args) {
  if (!std::filesystem::exists(args.library_path)) {
    return nullptr;
  }
  return std::make_shared<const fovstat::SplitLibrary>(
      fovstat::load_library(args.library_path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded field-of-view statistics for Gaussian-mixture RFS models"};
  app.require_subcommand(1);

  // gen-library
  auto* gen = app.add_subcommand("gen-library", "Generate the univariate split library");
  std::vector<int> counts{2, 3, 4, 5};
  std::vector<double> lambdas{1e-4, 1e-3, 1e-2};
  std::string gen_out;
  gen->add_option("--R", counts, "Split component counts");
  gen->add_option("--lambda", lambdas, "Regularizer values");
  gen->add_option("--out", gen_out, "Output library file")->required();

  // scenario-driven commands
  CommonArgs demo_args, card_args, plan_args;
  auto* demo = app.add_subcommand("partition-demo",
                                  "Propagate a density and apply negative-information updates");
  add_common(demo, demo_args, true);
  auto* card = app.add_subcommand("cardinality", "FoV cardinality pmf of the scenario model");
  add_common(card, card_args, false);
  auto* plan = app.add_subcommand("plan", "Max-variance FoV placement search");
  add_common(plan, plan_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (gen->parsed()) {
      fovstat::cli::cmd_gen_library(counts, lambdas, gen_out);
      std::cout << "library written to " << gen_out << "\n";
    } else if (demo->parsed()) {
      const auto scenario = load_with_overrides(demo_args);
      const auto records = fovstat::cli::cmd_partition_demo(
          scenario, load_library_if_present(demo_args), demo_args.out_dir);
      std::cout << "completed " << records.size() << " steps; outputs in " << demo_args.out_dir
                << "\n";
    } else if (card->parsed()) {
      const auto scenario = load_with_overrides(card_args);
      fovstat::cli::cmd_cardinality(scenario, load_library_if_present(card_args),
                                    card_args.out_dir, std::cout);
    } else if (plan->parsed()) {
      const auto scenario = load_with_overrides(plan_args);
      const auto result = fovstat::cli::cmd_plan(scenario, load_library_if_present(plan_args),
                                                 plan_args.out_dir);
      std::cout << "best center:";
      for (int d = 0; d < result.best_center.size(); ++d) {
        std::cout << ' ' << result.best_center(d);
      }
      std::cout << "  variance: " << result.best_variance << "\n";
    }
  } catch (const fovstat::ContradictionError& e) {
    std::cerr << "contradiction: " << e.what() << "\n";
    return kExitContradiction;
  } catch (const fovstat::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
