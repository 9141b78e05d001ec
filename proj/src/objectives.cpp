#include "stogreed/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stogreed {

namespace {

void check_weights(const Eigen::VectorXd& p, int m_blocks) {
  if (p.size() != m_blocks)
    throw std::invalid_argument("objectives: weight vector length mismatch");
  if ((p.array() <= 0.0).any())
    throw std::invalid_argument("objectives: weights must be positive");
  if (std::abs(p.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("objectives: weights must sum to 1");
}

}  // namespace

void BlockObjective::build_blocks(int block_size) {
  const int m = rows();
  if (block_size < 1 || block_size > m)
    throw std::invalid_argument("objectives: block size must be in [1, m]");
  for (int start = 0; start < m; start += block_size)
    block_start_.push_back(start);
  block_start_.push_back(m);

  const int M = block_count();
  if (m % block_size == 0) {
    weights_ = Eigen::VectorXd::Constant(M, 1.0 / M);
  } else {
    // Unequal final block: default to size-proportional sampling.
    weights_.resize(M);
    for (int i = 0; i < M; ++i)
      weights_[i] = static_cast<double>(block_rows(i)) / m;
  }
}

int BlockObjective::block_rows(int i) const {
  if (i < 0 || i + 1 >= static_cast<int>(block_start_.size()))
    throw std::out_of_range("objectives: block index out of range");
  return block_start_[i + 1] - block_start_[i];
}

BlockObjective BlockObjective::sparse_regression(Eigen::MatrixXd A,
                                                 Eigen::VectorXd y,
                                                 int block_size) {
  if (A.rows() == 0 || A.cols() == 0)
    throw std::invalid_argument("objectives: empty design matrix");
  if (y.size() != A.rows())
    throw std::invalid_argument("objectives: y length must match rows of A");
  BlockObjective obj;
  obj.design_ = std::move(A);
  obj.y_ = std::move(y);
  obj.build_blocks(block_size);
  return obj;
}

BlockObjective BlockObjective::matrix_recovery(
    const std::vector<Eigen::MatrixXd>& measurements, Eigen::VectorXd y,
    int block_size) {
  if (measurements.empty())
    throw std::invalid_argument("objectives: no measurement matrices");
  const int n1 = static_cast<int>(measurements.front().rows());
  const int n2 = static_cast<int>(measurements.front().cols());
  if (n1 == 0 || n2 == 0)
    throw std::invalid_argument("objectives: empty measurement matrix");
  if (y.size() != static_cast<Eigen::Index>(measurements.size()))
    throw std::invalid_argument(
        "objectives: y length must match measurement count");

  BlockObjective obj;
  obj.design_.resize(measurements.size(), n1 * n2);
  for (std::size_t j = 0; j < measurements.size(); ++j) {
    const auto& Aj = measurements[j];
    if (Aj.rows() != n1 || Aj.cols() != n2)
      throw std::invalid_argument(
          "objectives: inconsistent measurement dimensions");
    obj.design_.row(j) =
        Eigen::Map<const Eigen::VectorXd>(Aj.data(), Aj.size()).transpose();
  }
  obj.y_ = std::move(y);
  obj.mat_rows_ = n1;
  obj.mat_cols_ = n2;
  obj.build_blocks(block_size);
  return obj;
}

void BlockObjective::set_weights(Eigen::VectorXd p) {
  check_weights(p, block_count());
  weights_ = std::move(p);
}

double BlockObjective::block_value(int i, const Eigen::VectorXd& w) const {
  const int b = block_rows(i);
  const int s = block_start_[i];
  const Eigen::VectorXd r =
      design_.middleRows(s, b) * w - y_.segment(s, b);
  return r.squaredNorm() / (2.0 * b);
}

Eigen::VectorXd BlockObjective::block_gradient(int i,
                                               const Eigen::VectorXd& w) const {
  const int b = block_rows(i);
  const int s = block_start_[i];
  const auto A = design_.middleRows(s, b);
  return A.transpose() * (A * w - y_.segment(s, b)) / b;
}

double BlockObjective::full_value(const Eigen::VectorXd& w) const {
  double total = 0.0;
  for (int i = 0; i < block_count(); ++i) total += block_value(i, w);
  return total / block_count();
}

Eigen::VectorXd BlockObjective::full_gradient(const Eigen::VectorXd& w) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ambient_dim());
  for (int i = 0; i < block_count(); ++i) g += block_gradient(i, w);
  return g / block_count();
}

RestrictedConstants RestrictedConstants::assemble(
    int k, std::vector<double> rho_plus_per_block, double rho_minus,
    Eigen::VectorXd p, bool exhaustive) {
  RestrictedConstants c;
  c.k = k;
  c.rho_plus_per_block = std::move(rho_plus_per_block);
  c.rho_minus = rho_minus;
  c.p = std::move(p);
  c.exhaustive = exhaustive;
  c.alpha_k = c.recompute_alpha();
  c.rho_plus_bar = c.recompute_rho_plus_bar();
  c.rho_plus_max = *std::max_element(c.rho_plus_per_block.begin(),
                                     c.rho_plus_per_block.end());
  return c;
}

double RestrictedConstants::recompute_alpha() const {
  const int M = static_cast<int>(rho_plus_per_block.size());
  double a = 0.0;
  for (int i = 0; i < M; ++i)
    a = std::max(a, rho_plus_per_block[i] / (M * p[i]));
  return a;
}

double RestrictedConstants::recompute_rho_plus_bar() const {
  return std::accumulate(rho_plus_per_block.begin(), rho_plus_per_block.end(),
                         0.0) /
         static_cast<double>(rho_plus_per_block.size());
}

namespace {

// All size-k index subsets of [0, n), lexicographic order.
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

double choose_count(int n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= static_cast<double>(n - i) / (i + 1);
  return c;
}

// Largest definitional Lipschitz ratio of grad f_i over directions supported
// on a given coordinate set: sigma_max of the restricted columns of the
// block Hessian (1/b) A_i^T A_i.
double block_lipschitz_on(const BlockObjective& obj, int i,
                          const std::vector<int>& support) {
  const int b = obj.block_rows(i);
  const auto A = obj.design().middleRows(obj.block_begin(i), b);
  Eigen::MatrixXd cols(obj.ambient_dim(), support.size());
  for (std::size_t j = 0; j < support.size(); ++j)
    cols.col(j) = A.transpose() * A.col(support[j]) / b;
  return cols.jacobiSvd().singularValues()[0];
}

// Smallest curvature of F on a coordinate set: lambda_min of the restricted
// full Hessian.
double curvature_on(const Eigen::MatrixXd& hessian,
                    const std::vector<int>& support) {
  const int k = static_cast<int>(support.size());
  Eigen::MatrixXd sub(k, k);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) sub(a, c) = hessian(support[a], support[c]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
  return eig.eigenvalues()[0];
}

std::vector<int> random_subset(int n, int k, Rng& rng) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + rng.uniform_int(n - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Eigen::MatrixXd random_orthonormal(int n, int r, Rng& rng) {
  Eigen::MatrixXd G(n, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < n; ++i) G(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
}

}  // namespace

RestrictedConstants estimate_constants(const BlockObjective& obj, int k,
                                       const AtomModel& model, int trials,
                                       Rng& rng) {
  if (trials < 1)
    throw std::invalid_argument("objectives: need trials >= 1");
  const int M = obj.block_count();
  const int n = obj.ambient_dim();
  std::vector<double> rho_plus(M, 0.0);
  double rho_minus = std::numeric_limits<double>::infinity();

  const bool exhaustive = model.kind() == AtomKind::Coordinate &&
                          k <= n && choose_count(n, k) <= 2e6;

  if (exhaustive) {
    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < M; ++i) {
      const int b = obj.block_rows(i);
      const auto A = obj.design().middleRows(obj.block_begin(i), b);
      hessian += A.transpose() * A / b;
    }
    hessian /= M;
    for_each_subset(n, k, [&](const std::vector<int>& support) {
      for (int i = 0; i < M; ++i)
        rho_plus[i] = std::max(rho_plus[i],
                               block_lipschitz_on(obj, i, support));
      rho_minus = std::min(rho_minus, curvature_on(hessian, support));
    });
    return RestrictedConstants::assemble(k, std::move(rho_plus), rho_minus,
                                         obj.weights(), true);
  }

  // Monte Carlo: sample sparse pairs whose combined support stays at level k
  // and record the observed definitional ratios.
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd u, w0;
    if (model.kind() == AtomKind::RankOne) {
      const int r = std::max(1, k / 2);
      const Eigen::MatrixXd U = random_orthonormal(model.mat_rows(), r, rng);
      const Eigen::MatrixXd V = random_orthonormal(model.mat_cols(), r, rng);
      Eigen::MatrixXd X(r, r), X0(r, r);
      for (int a = 0; a < r; ++a)
        for (int c = 0; c < r; ++c) {
          X(a, c) = rng.gaussian();
          X0(a, c) = rng.gaussian();
        }
      Eigen::MatrixXd D = U * X * V.transpose();
      Eigen::MatrixXd W0 = U * X0 * V.transpose();
      u = Eigen::Map<Eigen::VectorXd>(D.data(), D.size());
      w0 = Eigen::Map<Eigen::VectorXd>(W0.data(), W0.size());
    } else {
      const int kk = std::min(k, model.atom_count());
      const auto support = random_subset(model.atom_count(), kk, rng);
      u = Eigen::VectorXd::Zero(n);
      w0 = Eigen::VectorXd::Zero(n);
      if (model.kind() == AtomKind::FiniteDictionary) {
        for (int idx : support) {
          u += rng.gaussian() * model.dictionary().col(idx);
          w0 += rng.gaussian() * model.dictionary().col(idx);
        }
      } else {
        for (int idx : support) {
          u[idx] = rng.gaussian();
          w0[idx] = rng.gaussian();
        }
      }
    }
    const Eigen::VectorXd w1 = w0 + u;
    const double un = u.norm();
    if (un < 1e-14) continue;
    for (int i = 0; i < M; ++i) {
      const double ratio =
          (obj.block_gradient(i, w1) - obj.block_gradient(i, w0)).norm() / un;
      rho_plus[i] = std::max(rho_plus[i], ratio);
    }
    const double curv =
        (obj.full_gradient(w1) - obj.full_gradient(w0)).dot(u) / (un * un);
    rho_minus = std::min(rho_minus, curv);
  }
  return RestrictedConstants::assemble(k, std::move(rho_plus), rho_minus,
                                       obj.weights(), false);
}

}  // namespace stogreed
