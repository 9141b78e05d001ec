#ifndef STOGREED_EXPERIMENT_HPP
#define STOGREED_EXPERIMENT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stogreed/objectives.hpp"
#include "stogreed/solvers.hpp"

namespace stogreed {

enum class ExperimentKind {
  ErrorVsEpoch,
  PhaseTransition,
  BlockSweep,
  StepsizeSweep,
  NoiseRobustness,
  SvdOversampling,
};

enum class Ensemble { Gaussian, SubsampledFourier, Identity };
enum class SolverChoice { StoIHT, StoGradMP, Both };

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Declarative description of one experiment: problem generator parameters,
/// solver selection, trial batch, and aggregation settings. Parsed from a
/// `key = value` spec file with schema_version 1.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::ErrorVsEpoch;
  SolverChoice solver = SolverChoice::Both;

  int n = 256;                  // vector problems
  int mat_rows = 0;             // matrix problems (both > 0)
  int mat_cols = 0;
  int k0 = 8;                   // planted sparsity / rank
  int k = 0;                    // solver sparsity target; 0 -> k0
  std::vector<int> m_list;      // measurement grid
  std::vector<int> b_list;      // block size grid
  std::vector<double> gamma_list;
  std::vector<int> oversampling_list;
  int power_iters = 0;
  Ensemble ensemble = Ensemble::Gaussian;
  double noise_norm = 0.0;      // measurement noise |e|
  NoiseSchedule gradient_noise{};

  double gamma = 1.0;
  int max_epochs = 500;
  double halt_error = 0.0;
  int trials = 50;
  int svd_subtrials = 5;
  std::uint64_t seed = 1;
  double success_threshold = 1e-6;
  double trim_fraction = 0.10;
  bool timing = false;          // include timing column in aggregate CSV
};

ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec parse_spec_file(const std::string& path);
void validate_spec(const ExperimentSpec& spec);  // throws SpecError

struct TrialSummary {
  std::string variant;
  std::string solver;
  int m = 0;
  int b = 0;
  int trial = 0;
  std::vector<double> epoch_error;   // value at the end of each epoch,
                                     // carried forward after halting
  std::vector<double> epoch_objective;
  std::vector<double> epoch_time;    // cumulative seconds
  std::vector<int> epoch_iteration;  // last iteration of each epoch
  double final_error = 0.0;
  TerminalStatus status = TerminalStatus::MaxEpochs;
};

struct AggregateRow {
  std::string metric;  // trimmed_error | recovery_fraction | min_measurements
  std::string variant;
  std::string solver;
  int m = 0;
  int b = 0;
  int epoch = -1;      // -1 for non-epoch metrics
  double value = 0.0;
  double time_s = 0.0;
};

struct TrialSet {
  ExperimentSpec spec;
  std::vector<TrialSummary> trials;
  std::vector<AggregateRow> aggregates;
};

/// Mean after dropping round(fraction/2 * N) values from each end (rounding
/// half away from zero).
double trimmed_mean(const std::vector<double>& values, double fraction);

/// Error-trimmed mean of (value, time) pairs: times attached to excluded
/// error values are excluded from the mean time as well.
std::pair<double, double> trimmed_mean_with_time(
    const std::vector<double>& values, const std::vector<double>& times,
    double fraction);

TrialSet run_experiment(const ExperimentSpec& spec);

/// Smallest grid m per block size whose trimmed-mean error curve ends below
/// the success threshold; value is NaN when no grid point qualifies.
std::vector<AggregateRow> min_measurements_table(const TrialSet& ts);

/// Writes <prefix>_raw.csv and <prefix>_agg.csv. The aggregate file omits
/// timing columns unless spec.timing is set, so fixed-seed reruns produce
/// byte-identical aggregates.
void export_csv(const TrialSet& ts, const std::string& path_prefix);

// Problem generators (seeded; deterministic given the stream).
struct GeneratedProblem {
  BlockObjective objective;
  Eigen::VectorXd w_star;
};
GeneratedProblem make_vector_instance(int n, int k0, int m, int b,
                                      Ensemble ensemble, double noise_norm,
                                      Rng& rng);
GeneratedProblem make_matrix_instance(int n1, int n2, int rank, int m, int b,
                                      Ensemble ensemble, double noise_norm,
                                      Rng& rng);

}  // namespace stogreed

#endif  // STOGREED_EXPERIMENT_HPP
