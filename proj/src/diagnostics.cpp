#include "stogreed/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace stogreed {

namespace {

double checked_sqrt(double radicand, const char* what) {
  if (radicand < -1e-12)
    throw std::domain_error(std::string("diagnostics: ") + what +
                            " is negative; formula out of regime");
  return std::sqrt(std::max(0.0, radicand));
}

// l2 norm of the `level` largest-magnitude entries (coordinate) or the top
// `level` singular values (rank-one) of a gradient.
double restricted_sup_norm(const AtomModel& model, const Eigen::VectorXd& g,
                           int level) {
  if (model.kind() == AtomKind::RankOne) {
    const Eigen::Map<const Eigen::MatrixXd> G(g.data(), model.mat_rows(),
                                              model.mat_cols());
    Eigen::VectorXd sv = G.jacobiSvd().singularValues();
    const int r = std::min<int>(level, sv.size());
    return sv.head(r).norm();
  }
  std::vector<double> mags(g.size());
  for (int i = 0; i < g.size(); ++i) mags[i] = std::abs(g[i]);
  const int r = std::min<int>(level, static_cast<int>(mags.size()));
  std::partial_sort(mags.begin(), mags.begin() + r, mags.end(),
                    std::greater<>());
  double sq = 0.0;
  for (int i = 0; i < r; ++i) sq += mags[i] * mags[i];
  return std::sqrt(sq);
}

}  // namespace

double kappa_stoiht(const DiagnosticInputs& d) {
  const double a = d.constants.alpha_k;
  const double rbar = d.constants.rho_plus_bar;
  const double rm = d.constants.rho_minus;
  const double g = d.gamma;

  const double contraction =
      checked_sqrt(1.0 - g * (2.0 - g * a) * rm, "contraction radicand");
  const double slack = checked_sqrt(
      (d.eta * d.eta - 1.0) * (1.0 + g * g * a * rbar - 2.0 * g * rm),
      "projection slack radicand");
  return 2.0 * contraction + slack;
}

double kappa_stogradmp(const DiagnosticInputs& d) {
  const double a = d.constants.alpha_k;
  const double rp = d.constants.rho_plus_max;
  const double rm = d.constants.rho_minus;
  if (rm <= 0.0)
    throw std::domain_error("diagnostics: rho_minus must be positive");
  const double e1 = d.eta1;
  const double e2 = d.eta2;

  const auto& p = d.constants.p;
  const int M = static_cast<int>(p.size());
  double max_mp = 0.0;
  for (int i = 0; i < M; ++i) max_mp = std::max(max_mp, M * p[i]);

  const double lead = (1.0 + e2) * checked_sqrt(a / rm, "alpha over rho-");
  const double inner = checked_sqrt(
      (((2.0 * e1 * e1 - 1.0) / (e1 * e1)) * rp - rm) / rm,
      "smoothness gap radicand");
  const double id_slack = checked_sqrt(e1 * e1 - 1.0, "eta1 radicand") / e1;
  return lead * (std::sqrt(max_mp) * inner + id_slack);
}

double sigma_stoiht(const BlockObjective& obj, const AtomModel& model,
                    const Eigen::VectorXd& w_star, double gamma, double eta,
                    const Eigen::VectorXd& p, int level) {
  const int M = obj.block_count();
  if (p.size() != M)
    throw std::invalid_argument("diagnostics: distribution length mismatch");

  double min_mp = std::numeric_limits<double>::infinity();
  for (int i = 0; i < M; ++i) min_mp = std::min(min_mp, M * p[i]);

  double mean_restricted = 0.0;
  double mean_full = 0.0;
  for (int i = 0; i < M; ++i) {
    const Eigen::VectorXd g = obj.block_gradient(i, w_star);
    mean_restricted += p[i] * restricted_sup_norm(model, g, level);
    mean_full += p[i] * g.norm();
  }
  const double slack = checked_sqrt(eta * eta - 1.0, "eta radicand");
  return gamma / min_mp * (2.0 * mean_restricted + slack * mean_full);
}

}  // namespace stogreed
