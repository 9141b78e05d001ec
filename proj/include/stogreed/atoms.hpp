#ifndef STOGREED_ATOMS_HPP
#define STOGREED_ATOMS_HPP

#include <Eigen/Dense>
#include <vector>

#include "stogreed/rng.hpp"

namespace stogreed {

enum class AtomKind { Coordinate, RankOne, FiniteDictionary };

/// An atom set over which signals are sparse: the n canonical coordinates,
/// the (infinite) set of unit-norm rank-one matrices on R^{n1 x n2}, or the
/// columns of an explicit unit-norm dictionary.
class AtomModel {
 public:
  static AtomModel coordinate(int n);
  static AtomModel rank_one(int n1, int n2);
  /// Columns must have unit Euclidean norm within 1e-12.
  static AtomModel finite_dictionary(Eigen::MatrixXd dictionary);

  AtomKind kind() const { return kind_; }
  /// Dimension of the vectors all operations act on (n or n1*n2).
  int ambient_dim() const { return ambient_dim_; }
  /// Number of atoms; -1 for the infinite rank-one set.
  int atom_count() const { return atom_count_; }
  int mat_rows() const { return mat_rows_; }
  int mat_cols() const { return mat_cols_; }
  const Eigen::MatrixXd& dictionary() const { return dict_; }

 private:
  AtomModel() = default;
  AtomKind kind_ = AtomKind::Coordinate;
  int ambient_dim_ = 0;
  int atom_count_ = 0;
  int mat_rows_ = 0;
  int mat_cols_ = 0;
  Eigen::MatrixXd dict_;
};

/// Identified support: an index set for coordinate/dictionary models, or a
/// pair of orthonormal subspace bases (U, V) for the rank-one model.
struct SupportSet {
  AtomKind kind = AtomKind::Coordinate;
  std::vector<int> indices;    // sorted, duplicate-free
  Eigen::MatrixXd col_basis;   // n1 x ru, orthonormal columns
  Eigen::MatrixXd row_basis;   // n2 x rv, orthonormal columns
                               // (ru and rv may differ after merges)

  int rank() const {
    return kind == AtomKind::RankOne
               ? static_cast<int>(
                     std::max(col_basis.cols(), row_basis.cols()))
               : static_cast<int>(indices.size());
  }
  bool empty() const { return rank() == 0; }
};

/// Checks the structural invariants of a support against its model
/// (index bounds, strict ordering, orthonormal bases); throws on violation.
void validate_support(const AtomModel& model, const SupportSet& support);

/// How identification projects: exact (eta = 1), randomized sketching for
/// the rank-one model, or greedy atom selection for dictionaries.
struct ProjectionConfig {
  enum class Mode { Exact, Randomized, Greedy };
  Mode mode = Mode::Exact;
  int oversampling = 0;  // extra sketch columns (randomized mode)
  int power_iters = 0;   // subspace iteration passes (randomized mode)

  static ProjectionConfig exact() { return {}; }
  static ProjectionConfig randomized(int oversampling, int power_iters = 0) {
    return {Mode::Randomized, oversampling, power_iters};
  }
  static ProjectionConfig greedy() { return {Mode::Greedy, 0, 0}; }
};

/// Projection tolerance this config certifies at sparsity k: 1 for exact
/// modes, the 1 + sqrt(s/(s+d)) sketching bound for randomized mode (holds
/// with high probability), NaN for greedy (measured per call instead).
double certified_eta(const ProjectionConfig& cfg, int k);

struct IdentifyOutcome {
  SupportSet support;
  /// Achieved (greedy, small dictionaries) or certified (exact/randomized)
  /// residual ratio vs. the best k-atom approximation; NaN when unknown.
  double eta = 1.0;
  bool eta_certified = true;
};

/// Returns a support with at most k atoms whose projection residual is
/// within the mode's tolerance of the best k-atom residual. Entries/singular
/// values that are exactly zero are never selected, so the support may hold
/// fewer than k atoms. Ties in magnitude resolve to the lowest index.
IdentifyOutcome identify(const AtomModel& model, const Eigen::VectorXd& v,
                         int k, const ProjectionConfig& cfg, Rng& rng);

/// Orthogonal projection of v onto the span of the supported atoms.
Eigen::VectorXd project(const AtomModel& model, const Eigen::VectorXd& v,
                        const SupportSet& support);

/// Union of two supports: index union, or orthonormalized subspace sums for
/// the rank-one model.
SupportSet merge(const AtomModel& model, const SupportSet& a,
                 const SupportSet& b);

struct SvdResult {
  Eigen::MatrixXd U;       // n1 x r
  Eigen::VectorXd sigma;   // r
  Eigen::MatrixXd V;       // n2 x r
};

/// Sketch-based approximate truncated SVD: applies W to a Gaussian
/// n2 x (s+d) test matrix, orthonormalizes the sample, and factors the
/// reduced matrix. With oversampling d the rank-s reconstruction satisfies
/// |W - W_s|_F <= (1 + sqrt(s/(s+d))) |W - W_s_best|_F with high
/// probability. q power iterations sharpen the sketch.
SvdResult randomized_svd(const Eigen::MatrixXd& W, int s, int d, int q,
                         Rng& rng);

}  // namespace stogreed

#endif  // STOGREED_ATOMS_HPP
