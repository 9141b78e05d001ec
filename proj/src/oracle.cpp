#include "stogreed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stogreed::oracle {

namespace {

double choose_count(int n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= static_cast<double>(n - i) / (i + 1);
  return c;
}

template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Residual of projecting v onto the span of the chosen atoms, computed from
// scratch with a dense least-squares solve.
double subset_residual(const AtomModel& model, const std::vector<int>& subset,
                       const Eigen::VectorXd& v) {
  if (model.kind() == AtomKind::Coordinate) {
    double keep = 0.0;
    for (int idx : subset) keep += v[idx] * v[idx];
    return std::sqrt(std::max(0.0, v.squaredNorm() - keep));
  }
  Eigen::MatrixXd sub(model.dictionary().rows(), subset.size());
  for (std::size_t j = 0; j < subset.size(); ++j)
    sub.col(j) = model.dictionary().col(subset[j]);
  const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(v);
  return (v - sub * coef).norm();
}

double support_residual(const AtomModel& model, const SupportSet& support,
                        const Eigen::VectorXd& v) {
  if (model.kind() == AtomKind::RankOne) {
    const Eigen::Map<const Eigen::MatrixXd> W(v.data(), model.mat_rows(),
                                              model.mat_cols());
    const auto& U = support.col_basis;
    const auto& V = support.row_basis;
    if (U.cols() == 0 || V.cols() == 0) return v.norm();
    const Eigen::MatrixXd P = U * (U.transpose() * W * V) * V.transpose();
    return (W - P).norm();
  }
  return subset_residual(model, support.indices, v);
}

std::vector<int> top_k_magnitude(const Eigen::VectorXd& v, int k) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });
  std::vector<int> picked;
  for (int idx : order) {
    if (static_cast<int>(picked.size()) == k) break;
    if (v[idx] == 0.0) break;
    picked.push_back(idx);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

Eigen::VectorXd hard_threshold(const Eigen::VectorXd& v, int k) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int idx : top_k_magnitude(v, k)) out[idx] = v[idx];
  return out;
}

void record_step(RunTrace& trace, int iter, const BlockObjective& obj,
                 const Eigen::VectorXd& w, const Eigen::VectorXd* w_star) {
  IterationRecord rec;
  rec.iteration = iter;
  rec.epoch = iter;
  rec.block = 0;
  rec.objective = obj.full_value(w);
  if (w_star) rec.error = (w - *w_star).norm();
  for (int i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) rec.support.push_back(i);
  rec.support_rank = static_cast<int>(rec.support.size());
  trace.records.push_back(std::move(rec));
}

}  // namespace

std::pair<SupportSet, double> best_support_bruteforce(
    const AtomModel& model, const Eigen::VectorXd& v, int k,
    const OracleBudget& budget) {
  if (v.size() != model.ambient_dim())
    throw std::invalid_argument("oracle: dimension mismatch");
  if (k < 1) throw std::invalid_argument("oracle: need k >= 1");

  if (model.kind() == AtomKind::RankOne) {
    const Eigen::Map<const Eigen::MatrixXd> W(v.data(), model.mat_rows(),
                                              model.mat_cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    int r = 0;
    while (r < std::min<int>(k, sigma.size()) && sigma[r] > 0.0) ++r;
    SupportSet support;
    support.kind = AtomKind::RankOne;
    support.col_basis = svd.matrixU().leftCols(r);
    support.row_basis = svd.matrixV().leftCols(r);
    const double res =
        r < sigma.size() ? sigma.tail(sigma.size() - r).norm() : 0.0;
    return {std::move(support), res};
  }

  const int N = model.atom_count();
  const int kk = std::min(k, N);
  if (choose_count(N, kk) > budget.max_subsets)
    throw std::runtime_error("oracle: subset enumeration exceeds budget");

  std::vector<int> best;
  double best_res = std::numeric_limits<double>::infinity();
  for_each_subset(N, kk, [&](const std::vector<int>& subset) {
    const double res = subset_residual(model, subset, v);
    if (res < best_res) {  // first-found optimum wins on ties
      best_res = res;
      best = subset;
    }
  });
  SupportSet support;
  support.kind = model.kind();
  support.indices = std::move(best);
  return {std::move(support), best_res};
}

bool verify_eta(const AtomModel& model, const Eigen::VectorXd& v, int k,
                const SupportSet& support, double eta,
                const OracleBudget& budget) {
  const auto [best, best_res] = best_support_bruteforce(model, v, k, budget);
  const double got = support_residual(model, support, v);
  const double slack = 1e-12 * std::max(1.0, v.norm());
  return got <= eta * best_res + slack;
}

RunTrace reference_iht(const BlockObjective& obj, int k, double gamma,
                       int max_iters, const Eigen::VectorXd* w_star) {
  const auto& A = obj.design();
  const auto& y = obj.observations();
  const double m = static_cast<double>(obj.rows());
  RunTrace trace;
  trace.iterations_per_epoch = 1;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(obj.ambient_dim());
  for (int t = 0; t < max_iters; ++t) {
    const Eigen::VectorXd grad = A.transpose() * (A * w - y) / m;
    w = hard_threshold(w - gamma * grad, k);
    record_step(trace, t, obj, w, w_star);
  }
  trace.status = TerminalStatus::MaxEpochs;
  trace.final_iterate = w;
  return trace;
}

RunTrace reference_gradmp(const BlockObjective& obj, int k, int max_iters,
                          const Eigen::VectorXd* w_star) {
  const auto& A = obj.design();
  const auto& y = obj.observations();
  const double m = static_cast<double>(obj.rows());
  RunTrace trace;
  trace.iterations_per_epoch = 1;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(obj.ambient_dim());
  std::vector<int> pruned;
  for (int t = 0; t < max_iters; ++t) {
    const Eigen::VectorXd grad = A.transpose() * (A * w - y) / m;
    const std::vector<int> picked =
        top_k_magnitude(grad, std::min<int>(2 * k, obj.ambient_dim()));
    std::vector<int> merged;
    std::set_union(picked.begin(), picked.end(), pruned.begin(), pruned.end(),
                   std::back_inserter(merged));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(obj.ambient_dim());
    if (!merged.empty()) {
      Eigen::MatrixXd sub(A.rows(), merged.size());
      for (std::size_t j = 0; j < merged.size(); ++j)
        sub.col(j) = A.col(merged[j]);
      const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(y);
      for (std::size_t j = 0; j < merged.size(); ++j)
        b[merged[j]] = coef[j];
    }
    pruned = top_k_magnitude(b, k);
    w = Eigen::VectorXd::Zero(obj.ambient_dim());
    for (int idx : pruned) w[idx] = b[idx];
    record_step(trace, t, obj, w, w_star);
  }
  trace.status = TerminalStatus::MaxEpochs;
  trace.final_iterate = w;
  return trace;
}

Eigen::VectorXd finite_difference_gradient(const BlockObjective& obj,
                                           const Eigen::VectorXd& w, int i,
                                           double h,
                                           const OracleBudget& budget) {
  if (obj.ambient_dim() > budget.max_dim)
    throw std::runtime_error("oracle: dimension exceeds budget");
  Eigen::VectorXd g(w.size());
  Eigen::VectorXd probe = w;
  for (int j = 0; j < w.size(); ++j) {
    probe[j] = w[j] + h;
    const double up = obj.block_value(i, probe);
    probe[j] = w[j] - h;
    const double down = obj.block_value(i, probe);
    probe[j] = w[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace stogreed::oracle
