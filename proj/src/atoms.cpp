#include "stogreed/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stogreed {

namespace {

Eigen::Map<const Eigen::MatrixXd> as_matrix(const AtomModel& model,
                                            const Eigen::VectorXd& v) {
  return {v.data(), model.mat_rows(), model.mat_cols()};
}

void check_dim(const AtomModel& model, const Eigen::VectorXd& v) {
  if (v.size() != model.ambient_dim())
    throw std::invalid_argument("atoms: vector dimension " +
                                std::to_string(v.size()) +
                                " does not match ambient dimension " +
                                std::to_string(model.ambient_dim()));
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& X) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  return qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), X.cols());
}

// Orthonormal basis of the column space of X, rank detected by pivoted QR.
Eigen::MatrixXd orth_basis(const Eigen::MatrixXd& X) {
  if (X.cols() == 0) return Eigen::MatrixXd(X.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const auto r = qr.rank();
  Eigen::MatrixXd Q =
      qr.householderQ() * Eigen::MatrixXd::Identity(X.rows(), r);
  return Q;
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
    if (v[idx] == 0.0) break;  // zero entries are never part of a support
    picked.push_back(idx);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

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

double dict_residual_norm(const Eigen::MatrixXd& dict,
                          const std::vector<int>& cols,
                          const Eigen::VectorXd& v) {
  Eigen::MatrixXd sub(dict.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(j) = dict.col(cols[j]);
  const Eigen::MatrixXd q = thin_q(sub);
  return (v - q * (q.transpose() * v)).norm();
}

}  // namespace

AtomModel AtomModel::coordinate(int n) {
  if (n < 1) throw std::invalid_argument("atoms: need n >= 1");
  AtomModel m;
  m.kind_ = AtomKind::Coordinate;
  m.ambient_dim_ = n;
  m.atom_count_ = n;
  return m;
}

AtomModel AtomModel::rank_one(int n1, int n2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("atoms: need n1,n2 >= 1");
  AtomModel m;
  m.kind_ = AtomKind::RankOne;
  m.ambient_dim_ = n1 * n2;
  m.atom_count_ = -1;
  m.mat_rows_ = n1;
  m.mat_cols_ = n2;
  return m;
}

AtomModel AtomModel::finite_dictionary(Eigen::MatrixXd dictionary) {
  if (dictionary.rows() < 1 || dictionary.cols() < 1)
    throw std::invalid_argument("atoms: empty dictionary");
  for (int j = 0; j < dictionary.cols(); ++j) {
    if (std::abs(dictionary.col(j).norm() - 1.0) > 1e-12)
      throw std::invalid_argument("atoms: dictionary column " +
                                  std::to_string(j) + " is not unit-norm");
  }
  AtomModel m;
  m.kind_ = AtomKind::FiniteDictionary;
  m.ambient_dim_ = static_cast<int>(dictionary.rows());
  m.atom_count_ = static_cast<int>(dictionary.cols());
  m.dict_ = std::move(dictionary);
  return m;
}

void validate_support(const AtomModel& model, const SupportSet& support) {
  if (support.kind != model.kind())
    throw std::invalid_argument("atoms: support kind does not match model");
  if (model.kind() == AtomKind::RankOne) {
    const auto& U = support.col_basis;
    const auto& V = support.row_basis;
    if (support.rank() == 0) return;
    if (U.rows() != model.mat_rows() || V.rows() != model.mat_cols())
      throw std::invalid_argument("atoms: subspace basis dimension mismatch");
    const double du = (U.transpose() * U -
                       Eigen::MatrixXd::Identity(U.cols(), U.cols()))
                          .norm();
    const double dv = (V.transpose() * V -
                       Eigen::MatrixXd::Identity(V.cols(), V.cols()))
                          .norm();
    if (du > 1e-10 || dv > 1e-10)
      throw std::invalid_argument("atoms: subspace basis not orthonormal");
    return;
  }
  int prev = -1;
  for (int idx : support.indices) {
    if (idx <= prev)
      throw std::invalid_argument("atoms: support indices not increasing");
    if (idx < 0 || idx >= model.atom_count())
      throw std::invalid_argument("atoms: support index out of range");
    prev = idx;
  }
}

double certified_eta(const ProjectionConfig& cfg, int k) {
  switch (cfg.mode) {
    case ProjectionConfig::Mode::Exact:
      return 1.0;
    case ProjectionConfig::Mode::Randomized:
      return 1.0 + std::sqrt(static_cast<double>(k) / (k + cfg.oversampling));
    case ProjectionConfig::Mode::Greedy:
      return std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

IdentifyOutcome identify_coordinate(const AtomModel& model,
                                    const Eigen::VectorXd& v, int k) {
  IdentifyOutcome out;
  out.support.kind = AtomKind::Coordinate;
  out.support.indices = top_k_magnitude(v, k);
  out.eta = 1.0;
  out.eta_certified = true;
  (void)model;
  return out;
}

IdentifyOutcome identify_rank_one(const AtomModel& model,
                                  const Eigen::VectorXd& v, int k,
                                  const ProjectionConfig& cfg, Rng& rng) {
  const auto W = as_matrix(model, v);
  IdentifyOutcome out;
  out.support.kind = AtomKind::RankOne;

  Eigen::MatrixXd U, V;
  Eigen::VectorXd sigma;
  if (cfg.mode == ProjectionConfig::Mode::Exact) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU |
                                              Eigen::ComputeThinV);
    U = svd.matrixU();
    V = svd.matrixV();
    sigma = svd.singularValues();
    out.eta = 1.0;
    out.eta_certified = true;
  } else {
    const int s = std::min({k, model.mat_rows(), model.mat_cols()});
    const int d =
        std::min(cfg.oversampling,
                 std::min(model.mat_rows(), model.mat_cols()) - s);
    const SvdResult r = randomized_svd(W, s, d, cfg.power_iters, rng);
    U = r.U;
    V = r.V;
    sigma = r.sigma;
    out.eta = 1.0 + std::sqrt(static_cast<double>(s) / (s + d));
    out.eta_certified = false;  // high-probability bound, not a guarantee
  }

  const int avail = static_cast<int>(sigma.size());
  const double drop = sigma.size() > 0 ? 1e-14 * sigma[0] : 0.0;
  int r = 0;
  while (r < std::min(k, avail) && sigma[r] > drop && sigma[r] > 0.0) ++r;
  out.support.col_basis = U.leftCols(r);
  out.support.row_basis = V.leftCols(r);
  return out;
}

IdentifyOutcome identify_dictionary(const AtomModel& model,
                                    const Eigen::VectorXd& v, int k) {
  const Eigen::MatrixXd& D = model.dictionary();
  const int N = model.atom_count();
  IdentifyOutcome out;
  out.support.kind = AtomKind::FiniteDictionary;

  // Greedy orthogonal selection: pick the atom most correlated with the
  // current residual, extend an orthonormal basis, repeat.
  std::vector<bool> used(N, false);
  Eigen::MatrixXd Q(D.rows(), 0);
  Eigen::VectorXd residual = v;
  const double floor = 1e-14 * std::max(1.0, v.norm());
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_corr = floor;
    for (int j = 0; j < N; ++j) {
      if (used[j]) continue;
      const double c = std::abs(D.col(j).dot(residual));
      if (c > best_corr) {
        best_corr = c;
        best = j;
      }
    }
    if (best < 0) break;
    used[best] = true;
    out.support.indices.push_back(best);
    Eigen::VectorXd q = D.col(best);
    if (Q.cols() > 0) {
      q -= Q * (Q.transpose() * q);
      q -= Q * (Q.transpose() * q);  // second pass keeps Q orthonormal
    }
    const double qn = q.norm();
    if (qn < 1e-14) break;
    Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
    Q.col(Q.cols() - 1) = q / qn;
    residual = v - Q * (Q.transpose() * v);
  }
  std::sort(out.support.indices.begin(), out.support.indices.end());

  // Certify the achieved ratio by exhaustive search when the dictionary is
  // small enough; otherwise report it as unknown.
  const int kk = std::min<int>(k, N);
  if (N <= 16 && kk >= 1) {
    double best_res = std::numeric_limits<double>::infinity();
    for_each_subset(N, kk, [&](const std::vector<int>& subset) {
      best_res = std::min(best_res, dict_residual_norm(D, subset, v));
    });
    const double got = residual.norm();
    const double tiny = 1e-12 * std::max(1.0, v.norm());
    if (best_res < tiny)
      out.eta = got < tiny ? 1.0 : std::numeric_limits<double>::infinity();
    else
      out.eta = std::max(1.0, got / best_res);
    out.eta_certified = true;
  } else {
    out.eta = std::numeric_limits<double>::quiet_NaN();
    out.eta_certified = false;
  }
  return out;
}

}  // namespace

IdentifyOutcome identify(const AtomModel& model, const Eigen::VectorXd& v,
                         int k, const ProjectionConfig& cfg, Rng& rng) {
  check_dim(model, v);
  if (k < 1) throw std::invalid_argument("atoms: need k >= 1");
  if (model.atom_count() > 0 && k > model.atom_count())
    throw std::invalid_argument("atoms: k exceeds atom count");

  switch (model.kind()) {
    case AtomKind::Coordinate:
      if (cfg.mode != ProjectionConfig::Mode::Exact)
        throw std::invalid_argument(
            "atoms: only exact identification is supported on the "
            "coordinate model");
      return identify_coordinate(model, v, k);
    case AtomKind::RankOne:
      if (cfg.mode == ProjectionConfig::Mode::Greedy)
        throw std::invalid_argument(
            "atoms: greedy identification needs a finite dictionary");
      return identify_rank_one(model, v, k, cfg, rng);
    case AtomKind::FiniteDictionary:
      if (cfg.mode != ProjectionConfig::Mode::Greedy)
        throw std::invalid_argument(
            "atoms: dictionary identification is greedy; exact projection "
            "is combinatorial");
      return identify_dictionary(model, v, k);
  }
  throw std::logic_error("atoms: unknown model kind");
}

Eigen::VectorXd project(const AtomModel& model, const Eigen::VectorXd& v,
                        const SupportSet& support) {
  check_dim(model, v);
  validate_support(model, support);
  if (support.empty()) return Eigen::VectorXd::Zero(v.size());

  switch (model.kind()) {
    case AtomKind::Coordinate: {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
      for (int idx : support.indices) out[idx] = v[idx];
      return out;
    }
    case AtomKind::RankOne: {
      const auto W = as_matrix(model, v);
      const auto& U = support.col_basis;
      const auto& V = support.row_basis;
      Eigen::MatrixXd proj = U * (U.transpose() * W * V) * V.transpose();
      return Eigen::Map<Eigen::VectorXd>(proj.data(), proj.size());
    }
    case AtomKind::FiniteDictionary: {
      const Eigen::MatrixXd& D = model.dictionary();
      Eigen::MatrixXd sub(D.rows(), support.indices.size());
      for (std::size_t j = 0; j < support.indices.size(); ++j)
        sub.col(j) = D.col(support.indices[j]);
      const Eigen::MatrixXd q = thin_q(sub);
      return q * (q.transpose() * v);
    }
  }
  throw std::logic_error("atoms: unknown model kind");
}

SupportSet merge(const AtomModel& model, const SupportSet& a,
                 const SupportSet& b) {
  validate_support(model, a);
  validate_support(model, b);

  SupportSet out;
  out.kind = model.kind();
  if (model.kind() == AtomKind::RankOne) {
    Eigen::MatrixXd cols(model.mat_rows(), a.col_basis.cols() +
                                               b.col_basis.cols());
    cols << a.col_basis, b.col_basis;
    Eigen::MatrixXd rows(model.mat_cols(), a.row_basis.cols() +
                                               b.row_basis.cols());
    rows << a.row_basis, b.row_basis;
    out.col_basis = orth_basis(cols);
    out.row_basis = orth_basis(rows);
    return out;
  }
  std::set_union(a.indices.begin(), a.indices.end(), b.indices.begin(),
                 b.indices.end(), std::back_inserter(out.indices));
  return out;
}

SvdResult randomized_svd(const Eigen::MatrixXd& W, int s, int d, int q,
                         Rng& rng) {
  const int n1 = static_cast<int>(W.rows());
  const int n2 = static_cast<int>(W.cols());
  if (s < 1) throw std::invalid_argument("randomized_svd: need s >= 1");
  if (d < 0 || q < 0)
    throw std::invalid_argument("randomized_svd: need d, q >= 0");
  if (s + d > std::min(n1, n2))
    throw std::invalid_argument(
        "randomized_svd: sketch width s + d exceeds matrix dimensions");

  const int width = s + d;
  Eigen::MatrixXd omega(n2, width);
  for (int j = 0; j < width; ++j)
    for (int i = 0; i < n2; ++i) omega(i, j) = rng.gaussian();

  Eigen::MatrixXd Q = thin_q(W * omega);
  for (int it = 0; it < q; ++it) {
    Q = thin_q(W.transpose() * Q);
    Q = thin_q(W * Q);
  }

  const Eigen::MatrixXd B = Q.transpose() * W;  // width x n2
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int r = std::min<int>(s, static_cast<int>(svd.singularValues().size()));
  SvdResult out;
  out.U = Q * svd.matrixU().leftCols(r);
  out.sigma = svd.singularValues().head(r);
  out.V = svd.matrixV().leftCols(r);
  return out;
}

}  // namespace stogreed
