#ifndef STOGREED_OBJECTIVES_HPP
#define STOGREED_OBJECTIVES_HPP

#include <Eigen/Dense>
#include <vector>

#include "stogreed/atoms.hpp"
#include "stogreed/rng.hpp"

namespace stogreed {

/// Block-decomposed least-squares objective
///
///   F(w) = (1/M) sum_i f_i(w),   f_i(w) = 1/(2 b_i) |y_i - A_i w|^2,
///
/// where block i owns b_i consecutive rows of the stacked design. Covers
/// sparse linear regression (rows of A) and low-rank matrix recovery (rows
/// are vectorized measurement matrices). Immutable after construction.
class BlockObjective {
 public:
  static BlockObjective sparse_regression(Eigen::MatrixXd A,
                                          Eigen::VectorXd y, int block_size);
  static BlockObjective matrix_recovery(
      const std::vector<Eigen::MatrixXd>& measurements, Eigen::VectorXd y,
      int block_size);

  int block_count() const {
    return static_cast<int>(block_start_.size()) - 1;  // last entry: sentinel
  }
  int ambient_dim() const { return static_cast<int>(design_.cols()); }
  int rows() const { return static_cast<int>(design_.rows()); }
  int block_begin(int i) const { return block_start_.at(i); }
  int block_rows(int i) const;
  /// Sampling distribution p over blocks. Defaults to uniform, or to
  /// block-size-proportional weights when block sizes are unequal.
  const Eigen::VectorXd& weights() const { return weights_; }
  void set_weights(Eigen::VectorXd p);

  double block_value(int i, const Eigen::VectorXd& w) const;
  Eigen::VectorXd block_gradient(int i, const Eigen::VectorXd& w) const;
  double full_value(const Eigen::VectorXd& w) const;
  Eigen::VectorXd full_gradient(const Eigen::VectorXd& w) const;

  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::VectorXd& observations() const { return y_; }

  bool is_matrix_problem() const { return mat_rows_ > 0; }
  int mat_rows() const { return mat_rows_; }
  int mat_cols() const { return mat_cols_; }

 private:
  BlockObjective() = default;
  void build_blocks(int block_size);

  Eigen::MatrixXd design_;  // m x n stacked rows
  Eigen::VectorXd y_;       // m
  Eigen::VectorXd weights_;
  std::vector<int> block_start_;  // plus sentinel m at the end
  int mat_rows_ = 0;
  int mat_cols_ = 0;
};

/// Bracketed estimates of the restricted smoothness/convexity constants at
/// sparsity level k. Monte Carlo sampling yields a lower bound per block on
/// rho^+_k(i) and an upper bound on rho^-_k; exhaustive enumeration over
/// coordinate supports (when affordable) makes them exact.
struct RestrictedConstants {
  int k = 0;
  std::vector<double> rho_plus_per_block;
  double rho_minus = 0.0;
  Eigen::VectorXd p;  // sampling weights the derived fields use
  bool exhaustive = false;

  double alpha_k = 0.0;
  double rho_plus_max = 0.0;
  double rho_plus_bar = 0.0;

  static RestrictedConstants assemble(int k,
                                      std::vector<double> rho_plus_per_block,
                                      double rho_minus, Eigen::VectorXd p,
                                      bool exhaustive);
  double recompute_alpha() const;
  double recompute_rho_plus_bar() const;
};

RestrictedConstants estimate_constants(const BlockObjective& obj, int k,
                                       const AtomModel& model, int trials,
                                       Rng& rng);

}  // namespace stogreed

#endif  // STOGREED_OBJECTIVES_HPP
