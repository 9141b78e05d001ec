#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "stogreed/diagnostics.hpp"
#include "stogreed/experiment.hpp"
#include "stogreed/problem_io.hpp"

namespace fs = std::filesystem;
using namespace stogreed;

namespace {

constexpr int kExitInvalidSpec = 2;
constexpr int kExitRuntime = 3;

std::string output_prefix(const std::string& spec_path,
                          const std::string& out_dir) {
  std::string dir = out_dir;
  if (const char* env = std::getenv("STOGREED_OUT_DIR"); env && *env)
    dir = env;
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return (fs::path(dir) / fs::path(spec_path).stem()).string();
}

int execute_spec(const std::string& spec_path, const std::string& out_dir,
                 bool want_sweep) {
  ExperimentSpec spec;
  try {
    spec = parse_spec_file(spec_path);
  } catch (const SpecError& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return kExitInvalidSpec;
  }
  const bool is_sweep = spec.kind == ExperimentKind::PhaseTransition ||
                        spec.kind == ExperimentKind::BlockSweep ||
                        spec.kind == ExperimentKind::StepsizeSweep ||
                        spec.kind == ExperimentKind::SvdOversampling;
  if (want_sweep != is_sweep) {
    std::cerr << "invalid spec: kind does not match the '"
              << (want_sweep ? "sweep" : "run") << "' subcommand\n";
    return kExitInvalidSpec;
  }
  try {
    const TrialSet ts = run_experiment(spec);
    const std::string prefix = output_prefix(spec_path, out_dir);
    export_csv(ts, prefix);
    std::cout << "wrote " << prefix << "_raw.csv and " << prefix
              << "_agg.csv (" << ts.trials.size() << " trial rows, "
              << ts.aggregates.size() << " aggregate rows)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run_diag(const std::string& problem_path, int k, double gamma, double eta,
             int trials, std::uint64_t seed) {
  ProblemSnapshot snap;
  try {
    snap = load_problem(problem_path);
  } catch (const std::exception& e) {
    std::cerr << "invalid problem file: " << e.what() << "\n";
    return kExitInvalidSpec;
  }
  try {
    const BlockObjective obj = snap.build_objective();
    const AtomModel model = snap.build_model();
    Rng rng(seed);

    std::cout << "problem: " << snap.kind << ", m = " << obj.rows()
              << ", ambient = " << obj.ambient_dim()
              << ", blocks = " << obj.block_count() << "\n";

    const auto report = [&](int level, const char* label) {
      Rng level_rng = Rng::derive(seed, level);
      const RestrictedConstants c =
          estimate_constants(obj, level, model, trials, level_rng);
      std::cout << label << " (level " << level << ", "
                << (c.exhaustive ? "exhaustive" : "monte carlo") << "): "
                << "rho+_max = " << c.rho_plus_max
                << ", rho+_bar = " << c.rho_plus_bar
                << ", rho- = " << c.rho_minus << ", alpha = " << c.alpha_k
                << "\n";
      return c;
    };

    const int max_level = model.kind() == AtomKind::RankOne
                              ? std::min(model.mat_rows(), model.mat_cols())
                              : model.atom_count();
    DiagnosticInputs d3{report(std::min(3 * k, max_level), "constants"),
                        gamma, eta, eta, eta};
    try {
      std::cout << "kappa_stoiht = " << kappa_stoiht(d3) << "\n";
    } catch (const std::domain_error& e) {
      std::cout << "kappa_stoiht: " << e.what() << "\n";
    }
    DiagnosticInputs d4{report(std::min(4 * k, max_level), "constants"),
                        gamma, eta, eta, eta};
    try {
      std::cout << "kappa_stogradmp = " << kappa_stogradmp(d4) << "\n";
    } catch (const std::domain_error& e) {
      std::cout << "kappa_stogradmp: " << e.what() << "\n";
    }

    if (snap.w_star.size() > 0) {
      const double sigma =
          sigma_stoiht(obj, model, snap.w_star, gamma, eta, obj.weights(),
                       std::min(3 * k, max_level));
      std::cout << "sigma_stoiht(w_star) = " << sigma << "\n";
    } else {
      std::cout << "sigma_stoiht: n/a (no w_star in problem file)\n";
    }
    (void)rng;
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "diag failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic greedy sparse recovery experiment runner"};
  app.require_subcommand(1);

  std::string spec_path, out_dir, problem_path;
  int k = 1, trials = 200;
  double gamma = 1.0, eta = 1.0;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "Run a single experiment spec");
  run->add_option("spec", spec_path, "Experiment spec file")->required();
  run->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run a grid-sweep spec");
  sweep->add_option("spec", spec_path, "Experiment spec file")->required();
  sweep->add_option("--out", out_dir, "Output directory");

  auto* diag = app.add_subcommand(
      "diag", "Estimate restricted constants and contraction diagnostics");
  diag->add_option("problem", problem_path, "Problem snapshot file")
      ->required();
  diag->add_option("--k", k, "Sparsity level")->required();
  diag->add_option("--gamma", gamma, "Step size used in kappa/sigma");
  diag->add_option("--eta", eta, "Projection tolerance used in kappa/sigma");
  diag->add_option("--trials", trials, "Monte Carlo trials");
  diag->add_option("--seed", seed, "Estimation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidSpec;
  }

  if (run->parsed()) return execute_spec(spec_path, out_dir, false);
  if (sweep->parsed()) return execute_spec(spec_path, out_dir, true);
  return run_diag(problem_path, k, gamma, eta, trials, seed);
}
