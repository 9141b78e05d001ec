#ifndef STOGREED_SOLVERS_HPP
#define STOGREED_SOLVERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "stogreed/atoms.hpp"
#include "stogreed/objectives.hpp"
#include "stogreed/rng.hpp"
#include "stogreed/trace.hpp"

namespace stogreed {

/// Additive noise injected into the sampled gradient each iteration.
struct NoiseSchedule {
  enum class Kind { None, ConstantNorm, Decaying };
  Kind kind = Kind::None;
  double nu = 0.0;  // |e^t| for ConstantNorm, nu/(t+1) for Decaying
};

struct Halting {
  int max_epochs = 500;
  /// Converge when |w - w*| drops below this (0 disables; needs w*).
  double error_tolerance = 0.0;
  /// Converge when |w_t - w_{t-1}| / max(1, |w_t|) drops below this.
  double step_tolerance = 1e-9;
  /// Converge when the best objective has not improved for this many
  /// epochs (0 disables).
  int stall_window_epochs = 0;
};

struct SolverConfig {
  int k = 1;
  double gamma = 1.0;                // step size (StoIHT only)
  ProjectionConfig identify_proj{};  // eta / eta1 role
  ProjectionConfig prune_proj{};     // eta2 role (StoGradMP)
  Eigen::VectorXd p;                 // block sampling; empty -> objective's
  std::vector<double> eta_schedule;  // per-iteration eta^j targets
  NoiseSchedule noise{};
  double estimation_tolerance = 0.0;      // epsilon
  std::vector<double> epsilon_schedule;   // per-iteration epsilon^t
  /// Strong-convexity estimate linking epsilon to the inner gradient-norm
  /// stopping rule: eps_grad = estimation_rho_minus * epsilon.
  double estimation_rho_minus = 1.0;
  Halting halting{};
  std::uint64_t seed = 0;
};

/// Draws a block index distributed according to p from the given stream.
int sample_index(const Eigen::VectorXd& p, Rng& rng);

/// Stochastic iterative hard thresholding. Each iteration samples a block,
/// takes the weighted gradient step b = w - gamma/(M p(i)) grad f_i(w)
/// (plus scheduled gradient noise), and projects b onto its best-k support.
RunTrace stoiht(const BlockObjective& obj, const AtomModel& model,
                const SolverConfig& cfg, const Eigen::VectorXd& w0,
                const Eigen::VectorXd* w_star = nullptr);

/// Stochastic gradient matching pursuit. Each iteration identifies a 2k
/// support of the sampled gradient, merges it with the previous pruned
/// support, minimizes F restricted to the merged span, and prunes back to k.
RunTrace stogradmp(const BlockObjective& obj, const AtomModel& model,
                   const SolverConfig& cfg, const Eigen::VectorXd& w0,
                   const Eigen::VectorXd* w_star = nullptr);

struct RestrictedSolveResult {
  Eigen::VectorXd point;  // lies in span(D_support) exactly
  bool converged = true;
  int iterations = 0;
};

/// Minimizes F over span(D_support) by conjugate gradient on the restricted
/// normal equations, stopping once |P_support grad F| <= grad_tolerance.
/// Ill-conditioned systems are retried with a 1e-10 ridge. At most
/// 10 * dim(span) inner iterations; on exhaustion the best iterate is
/// returned with converged = false.
RestrictedSolveResult restricted_minimize(const BlockObjective& obj,
                                          const AtomModel& model,
                                          const SupportSet& support,
                                          double grad_tolerance);

}  // namespace stogreed

#endif  // STOGREED_SOLVERS_HPP
