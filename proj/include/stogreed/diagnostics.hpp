#ifndef STOGREED_DIAGNOSTICS_HPP
#define STOGREED_DIAGNOSTICS_HPP

#include <Eigen/Dense>

#include "stogreed/atoms.hpp"
#include "stogreed/objectives.hpp"

namespace stogreed {

/// Constants and run parameters feeding the contraction-coefficient
/// formulas. The constants must be estimated at level 3k for the hard
/// thresholding formula and 4k for the matching pursuit one.
struct DiagnosticInputs {
  RestrictedConstants constants;
  double gamma = 1.0;   // step size (hard thresholding)
  double eta = 1.0;     // projection tolerance (hard thresholding)
  double eta1 = 1.0;    // identification tolerance (matching pursuit)
  double eta2 = 1.0;    // pruning tolerance (matching pursuit)
};

/// Expected per-iteration error contraction of stochastic hard thresholding:
///
///   kappa = 2 sqrt(1 - gamma (2 - gamma a) r-)
///         + sqrt((eta^2 - 1)(1 + gamma^2 a rbar - 2 gamma r-))
///
/// with a = alpha_{3k}, rbar = mean rho^+_{3k}(i), r- = rho^-_{3k}.
/// Convergence needs kappa < 1. Throws std::domain_error when a radicand is
/// negative (parameters outside the formula's regime).
double kappa_stoiht(const DiagnosticInputs& d);

/// Contraction coefficient of stochastic matching pursuit:
///
///   kappa = (1 + eta2) sqrt(a/r-) (max_i sqrt(M p_i)
///             sqrt((((2 eta1^2 - 1)/eta1^2) r+ - r-)/r-)
///           + sqrt(eta1^2 - 1)/eta1)
///
/// with a = alpha_{4k}, r+ = rho^+_{4k}, r- = rho^-_{4k}.
double kappa_stogradmp(const DiagnosticInputs& d);

/// Convergence floor of stochastic hard thresholding at a reference point:
/// exact enumeration over blocks of
///
///   sigma = gamma/min_i(M p_i) (2 E_i max_{|O|<=level} |P_O grad f_i(w*)|
///           + sqrt(eta^2 - 1) E_i |grad f_i(w*)|).
///
/// The inner max is the norm of the `level` largest gradient entries
/// (coordinate model) or singular values (rank-one model).
double sigma_stoiht(const BlockObjective& obj, const AtomModel& model,
                    const Eigen::VectorXd& w_star, double gamma, double eta,
                    const Eigen::VectorXd& p, int level);

}  // namespace stogreed

#endif  // STOGREED_DIAGNOSTICS_HPP
