#ifndef STOGREED_ORACLE_HPP
#define STOGREED_ORACLE_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "stogreed/atoms.hpp"
#include "stogreed/objectives.hpp"
#include "stogreed/trace.hpp"

// Brute-force reference implementations for tests and diagnostics. Nothing
// here may reuse the projection or solver code paths it is used to check;
// every operation recomputes from first principles.
namespace stogreed::oracle {

struct OracleBudget {
  double max_subsets = 2e6;  // cap on choose(N, k) enumerations
  int max_dim = 4096;        // cap on finite-difference dimensions
};

/// Globally optimal k-atom support by exhaustive enumeration (coordinate and
/// dictionary models) or full SVD truncation (rank-one). Returns the support
/// and its residual norm. Hard-fails when the budget is exceeded.
std::pair<SupportSet, double> best_support_bruteforce(
    const AtomModel& model, const Eigen::VectorXd& v, int k,
    const OracleBudget& budget = {});

/// True iff |v - P_support v| <= eta * |v - P_best v| (small numerical
/// slack) with the brute-force optimum as reference.
bool verify_eta(const AtomModel& model, const Eigen::VectorXd& v, int k,
                const SupportSet& support, double eta,
                const OracleBudget& budget = {});

/// Plain full-gradient iterative hard thresholding on a coordinate problem:
/// w <- H_k(w - gamma * grad F(w)).
RunTrace reference_iht(const BlockObjective& obj, int k, double gamma,
                       int max_iters, const Eigen::VectorXd* w_star = nullptr);

/// Deterministic full-gradient matching pursuit on a coordinate problem:
/// identify 2k, merge, least-squares estimate, prune to k.
RunTrace reference_gradmp(const BlockObjective& obj, int k, int max_iters,
                          const Eigen::VectorXd* w_star = nullptr);

/// Central finite differences of one block objective.
Eigen::VectorXd finite_difference_gradient(const BlockObjective& obj,
                                           const Eigen::VectorXd& w, int i,
                                           double h,
                                           const OracleBudget& budget = {});

}  // namespace stogreed::oracle

#endif  // STOGREED_ORACLE_HPP
