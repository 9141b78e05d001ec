#ifndef STOGREED_PROBLEM_IO_HPP
#define STOGREED_PROBLEM_IO_HPP

#include <Eigen/Dense>
#include <string>

#include "stogreed/atoms.hpp"
#include "stogreed/objectives.hpp"

namespace stogreed {

/// On-disk problem bundle: one self-describing text file holding the stacked
/// design rows, observations, block size, and optional sampling weights and
/// reference solution. Design rows act on the library's vector layout
/// (column-major vectorization for matrix problems).
struct ProblemSnapshot {
  std::string kind;  // "sparse_regression" | "matrix_recovery"
  int mat_rows = 0;  // matrix problems only
  int mat_cols = 0;
  int block_size = 1;
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  Eigen::VectorXd p;       // empty -> objective default
  Eigen::VectorXd w_star;  // empty -> unknown

  BlockObjective build_objective() const;
  AtomModel build_model() const;
};

void save_problem(const std::string& path, const ProblemSnapshot& snapshot);
ProblemSnapshot load_problem(const std::string& path);

}  // namespace stogreed

#endif  // STOGREED_PROBLEM_IO_HPP
