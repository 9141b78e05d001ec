#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "stogreed/atoms.hpp"
#include "stogreed/oracle.hpp"

using namespace stogreed;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(vals.size());
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

Eigen::VectorXd random_vec(int n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
  return v;
}

Eigen::MatrixXd random_dictionary(int n, int atoms, Rng& rng) {
  Eigen::MatrixXd D(n, atoms);
  for (int j = 0; j < atoms; ++j) {
    for (int i = 0; i < n; ++i) D(i, j) = rng.gaussian();
    D.col(j).normalize();
  }
  return D;
}

SupportSet index_support(AtomKind kind, std::vector<int> idx) {
  SupportSet s;
  s.kind = kind;
  s.indices = std::move(idx);
  return s;
}

}  // namespace

TEST_CASE("coordinate identify picks the largest magnitudes") {
  const AtomModel model = AtomModel::coordinate(3);
  Rng rng(1);
  const auto out =
      identify(model, vec({3, -5, 1}), 1, ProjectionConfig::exact(), rng);
  CHECK(out.support.indices == std::vector<int>{1});
  CHECK(out.eta == 1.0);
}

TEST_CASE("coordinate identify breaks magnitude ties at the lowest index") {
  const AtomModel model = AtomModel::coordinate(3);
  Rng rng(1);
  const auto out =
      identify(model, vec({2, -2, 0}), 1, ProjectionConfig::exact(), rng);
  CHECK(out.support.indices == std::vector<int>{0});
}

TEST_CASE("coordinate identify drops exact zeros and the zero vector") {
  const AtomModel model = AtomModel::coordinate(4);
  Rng rng(1);
  const auto out =
      identify(model, vec({0, 7, 0, 0}), 3, ProjectionConfig::exact(), rng);
  CHECK(out.support.indices == std::vector<int>{1});
  const auto empty = identify(model, Eigen::VectorXd::Zero(4), 2,
                              ProjectionConfig::exact(), rng);
  CHECK(empty.support.empty());
}

TEST_CASE("identify argument errors") {
  const AtomModel model = AtomModel::coordinate(4);
  Rng rng(1);
  CHECK_THROWS_AS(
      identify(model, Eigen::VectorXd::Zero(5), 1, ProjectionConfig::exact(),
               rng),
      std::invalid_argument);
  CHECK_THROWS_AS(identify(model, Eigen::VectorXd::Zero(4), 5,
                           ProjectionConfig::exact(), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(identify(model, Eigen::VectorXd::Zero(4), 1,
                           ProjectionConfig::randomized(2), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(identify(model, Eigen::VectorXd::Zero(4), 0,
                           ProjectionConfig::exact(), rng),
                  std::invalid_argument);
}

TEST_CASE("rank-one exact identify spans the top singular subspaces") {
  const AtomModel model = AtomModel::rank_one(4, 4);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(4, 4);
  W.diagonal() << 3, 2, 1, 0;
  const Eigen::Map<Eigen::VectorXd> w(W.data(), W.size());
  Rng rng(1);
  const auto out = identify(model, w, 2, ProjectionConfig::exact(), rng);
  CHECK(out.support.rank() == 2);
  const Eigen::VectorXd proj = project(model, w, out.support);
  // Best rank-2 residual of diag(3,2,1,0) is the trailing singular mass.
  CHECK((w - proj).norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("projection matches the stated coordinate example") {
  const AtomModel model = AtomModel::coordinate(3);
  const Eigen::VectorXd p =
      project(model, vec({3, -5, 1}), index_support(AtomKind::Coordinate, {1}));
  CHECK(p.isApprox(vec({0, -5, 0}), 1e-15));
}

TEST_CASE("projection onto the full support is the identity") {
  const AtomModel model = AtomModel::coordinate(5);
  Rng rng(7);
  const Eigen::VectorXd v = random_vec(5, rng);
  const Eigen::VectorXd p =
      project(model, v, index_support(AtomKind::Coordinate, {0, 1, 2, 3, 4}));
  CHECK((p - v).norm() < 1e-14);
}

TEST_CASE("projection is idempotent and Pythagorean on all models") {
  Rng rng(11);
  const auto check_model = [&](const AtomModel& model, int k) {
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::VectorXd v = random_vec(model.ambient_dim(), rng);
      const ProjectionConfig cfg =
          model.kind() == AtomKind::FiniteDictionary
              ? ProjectionConfig::greedy()
              : ProjectionConfig::exact();
      const auto out = identify(model, v, k, cfg, rng);
      const Eigen::VectorXd p1 = project(model, v, out.support);
      const Eigen::VectorXd p2 = project(model, p1, out.support);
      CHECK((p2 - p1).norm() <= 1e-10 * std::max(1.0, p1.norm()));
      const double lhs = v.squaredNorm();
      const double rhs = p1.squaredNorm() + (v - p1).squaredNorm();
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  };
  check_model(AtomModel::coordinate(12), 4);
  check_model(AtomModel::rank_one(5, 7), 2);
  check_model(AtomModel::finite_dictionary(random_dictionary(9, 14, rng)), 3);
}

TEST_CASE("coordinate identify agrees with brute force on small dimensions") {
  Rng rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 4 + rng.uniform_int(9);  // up to 12
    const int k = 1 + rng.uniform_int(n);
    const AtomModel model = AtomModel::coordinate(n);
    const Eigen::VectorXd v = random_vec(n, rng);
    const auto fast = identify(model, v, k, ProjectionConfig::exact(), rng);
    const auto [best, res] = oracle::best_support_bruteforce(model, v, k);
    CHECK(fast.support.indices == best.indices);
  }
}

TEST_CASE("eta consequence inequality holds for returned supports") {
  // For any |R| <= k:  |P_R w| <= |P_G w| + sqrt((eta^2-1)/eta^2) |P_Gc w|.
  Rng rng(37);
  const int n = 10, k = 3;
  const AtomModel model = AtomModel::coordinate(n);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd v = random_vec(n, rng);
    const auto out = identify(model, v, k, ProjectionConfig::exact(), rng);
    const Eigen::VectorXd pg = project(model, v, out.support);
    const double eta = out.eta;
    const double slack = std::sqrt((eta * eta - 1.0) / (eta * eta));
    for (int rr = 0; rr < 10; ++rr) {
      std::vector<int> r_idx;
      for (int i = 0; i < n; ++i)
        if (rng.uniform() < static_cast<double>(k) / n) r_idx.push_back(i);
      if (static_cast<int>(r_idx.size()) > k) r_idx.resize(k);
      const Eigen::VectorXd pr =
          project(model, v, index_support(AtomKind::Coordinate, r_idx));
      CHECK(pr.norm() <= pg.norm() + slack * (v - pg).norm() + 1e-12);
    }
  }
}

TEST_CASE("rank-one eta consequence with randomized identification") {
  Rng rng(41);
  const int n1 = 12, n2 = 10, k = 3;
  const AtomModel model = AtomModel::rank_one(n1, n2);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd W(n1, n2);
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) W(i, j) = rng.gaussian();
    const Eigen::Map<Eigen::VectorXd> w(W.data(), W.size());
    const auto out =
        identify(model, w, k, ProjectionConfig::randomized(3), rng);
    const Eigen::VectorXd pg = project(model, w, out.support);

    // Achieved eta measured against the exact truncation oracle.
    const auto [best, best_res] = oracle::best_support_bruteforce(model, w, k);
    const double achieved = (w - pg).norm() / best_res;
    const double slack =
        achieved <= 1.0
            ? 0.0
            : std::sqrt((achieved * achieved - 1.0) / (achieved * achieved));
    for (int rr = 0; rr < 5; ++rr) {
      SupportSet random_r;
      random_r.kind = AtomKind::RankOne;
      Eigen::MatrixXd gu(n1, k), gv(n2, k);
      for (int j = 0; j < k; ++j) {
        for (int i = 0; i < n1; ++i) gu(i, j) = rng.gaussian();
        for (int i = 0; i < n2; ++i) gv(i, j) = rng.gaussian();
      }
      Eigen::HouseholderQR<Eigen::MatrixXd> qu(gu), qv(gv);
      random_r.col_basis =
          qu.householderQ() * Eigen::MatrixXd::Identity(n1, k);
      random_r.row_basis =
          qv.householderQ() * Eigen::MatrixXd::Identity(n2, k);
      const Eigen::VectorXd pr = project(model, w, random_r);
      CHECK(pr.norm() <= pg.norm() + slack * (w - pg).norm() + 1e-10);
    }
  }
}

TEST_CASE("exact rank projection equals singular value truncation") {
  Rng rng(43);
  const int n1 = 8, n2 = 6, k = 3;
  const AtomModel model = AtomModel::rank_one(n1, n2);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd W(n1, n2);
    for (int j = 0; j < n2; ++j)
      for (int i = 0; i < n1; ++i) W(i, j) = rng.gaussian();
    const Eigen::Map<Eigen::VectorXd> w(W.data(), W.size());
    const auto out = identify(model, w, k, ProjectionConfig::exact(), rng);
    const Eigen::VectorXd proj = project(model, w, out.support);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd trunc = svd.matrixU().leftCols(k) *
                                  svd.singularValues().head(k).asDiagonal() *
                                  svd.matrixV().leftCols(k).transpose();
    const Eigen::Map<const Eigen::VectorXd> tv(trunc.data(), trunc.size());
    CHECK((proj - tv).norm() <= 1e-10 * std::max(1.0, tv.norm()));
  }
}

TEST_CASE("merge unions index supports") {
  const AtomModel model = AtomModel::coordinate(6);
  const auto a = index_support(AtomKind::Coordinate, {1, 3});
  const auto b = index_support(AtomKind::Coordinate, {3, 5});
  CHECK(merge(model, a, b).indices == std::vector<int>{1, 3, 5});
  const SupportSet none = index_support(AtomKind::Coordinate, {});
  CHECK(merge(model, a, none).indices == a.indices);
}

TEST_CASE("merge rejects supports from a different model kind") {
  const AtomModel model = AtomModel::coordinate(6);
  SupportSet wrong;
  wrong.kind = AtomKind::RankOne;
  CHECK_THROWS_AS(merge(model, wrong, wrong), std::invalid_argument);
}

TEST_CASE(
    "merging orthogonal rank-one supports gives an orthonormal rank-2 basis") {
  const AtomModel model = AtomModel::rank_one(4, 4);
  SupportSet a, b;
  a.kind = b.kind = AtomKind::RankOne;
  a.col_basis = Eigen::MatrixXd::Identity(4, 4).leftCols(1);
  a.row_basis = Eigen::MatrixXd::Identity(4, 4).leftCols(1);
  b.col_basis = Eigen::MatrixXd::Identity(4, 4).middleCols(1, 1);
  b.row_basis = Eigen::MatrixXd::Identity(4, 4).middleCols(1, 1);
  const SupportSet m = merge(model, a, b);
  CHECK(m.col_basis.cols() == 2);
  const Eigen::MatrixXd gram = m.col_basis.transpose() * m.col_basis;
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("greedy dictionary identify reports a certified ratio") {
  Rng rng(53);
  const AtomModel model =
      AtomModel::finite_dictionary(random_dictionary(8, 12, rng));
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::VectorXd v = random_vec(8, rng);
    const auto out = identify(model, v, 2, ProjectionConfig::greedy(), rng);
    REQUIRE(out.eta_certified);
    CHECK(out.eta >= 1.0);
    CHECK(oracle::verify_eta(model, v, 2, out.support, out.eta));
  }
}

TEST_CASE("dictionary columns must be unit norm") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(3, 3);
  D(0, 0) = 2.0;
  CHECK_THROWS_AS(AtomModel::finite_dictionary(D), std::invalid_argument);
}

TEST_CASE("randomized svd recovers exactly low-rank matrices") {
  Rng rng(59);
  Eigen::MatrixXd L(20, 3), R(15, 3);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 20; ++i) L(i, j) = rng.gaussian();
    for (int i = 0; i < 15; ++i) R(i, j) = rng.gaussian();
  }
  const Eigen::MatrixXd W = L * R.transpose();
  const SvdResult r = randomized_svd(W, 3, 2, 0, rng);
  const Eigen::MatrixXd rec = r.U * r.sigma.asDiagonal() * r.V.transpose();
  CHECK((W - rec).norm() <= 1e-8 * W.norm());
}

TEST_CASE("randomized svd meets the oversampling bound on a diagonal case") {
  Rng rng(61);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(4, 4);
  W.diagonal() << 3, 2, 1, 0;
  // Exact-SVD oracle best rank-2 error is 1; bound is (1 + sqrt(2/4)).
  const double bound = (1.0 + std::sqrt(0.5)) * 1.0;
  for (int rep = 0; rep < 20; ++rep) {
    const SvdResult r = randomized_svd(W, 2, 2, 0, rng);
    const Eigen::MatrixXd rec = r.U * r.sigma.asDiagonal() * r.V.transpose();
    CHECK((W - rec).norm() <= bound + 1e-9);
  }
}

TEST_CASE("randomized svd bound satisfaction rate on gaussian matrices") {
  Rng rng(67);
  const int n = 30, s = 4, d = 4, reps = 60;
  int hits = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Eigen::MatrixXd W(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) W(i, j) = rng.gaussian();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    const double best = svd.singularValues().tail(n - s).norm();
    const SvdResult r = randomized_svd(W, s, d, 0, rng);
    const Eigen::MatrixXd rec = r.U * r.sigma.asDiagonal() * r.V.transpose();
    const double bound = (1.0 + std::sqrt(static_cast<double>(s) / (s + d)));
    if ((W - rec).norm() <= bound * best) ++hits;
  }
  CHECK(hits >= static_cast<int>(0.9 * reps));
}

TEST_CASE("randomized svd rejects oversized sketches") {
  Rng rng(71);
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(randomized_svd(W, 3, 2, 0, rng), std::invalid_argument);
}
