#ifndef STOGREED_TRACE_HPP
#define STOGREED_TRACE_HPP

#include <Eigen/Dense>
#include <vector>

namespace stogreed {

enum class TerminalStatus { Converged, MaxEpochs, Diverged };

struct IterationRecord {
  int iteration = 0;
  int epoch = 0;
  int block = 0;
  double error = std::numeric_limits<double>::quiet_NaN();  // |w - w*|, if known
  double objective = 0.0;
  std::vector<int> support;  // indices for index models
  int support_rank = 0;
  double wall_time_s = 0.0;  // cumulative
  bool estimate_converged = true;  // inner solve hit its tolerance
};

/// Per-iteration log of a solver run; the unit of all experiment output.
struct RunTrace {
  std::vector<IterationRecord> records;
  TerminalStatus status = TerminalStatus::MaxEpochs;
  Eigen::VectorXd final_iterate;
  int iterations_per_epoch = 1;

  double final_error() const {
    return records.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : records.back().error;
  }
};

}  // namespace stogreed

#endif  // STOGREED_TRACE_HPP
