#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "stogreed/atoms.hpp"
#include "stogreed/objectives.hpp"
#include "stogreed/oracle.hpp"

using namespace stogreed;

namespace {

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

}  // namespace

TEST_CASE("brute force on the coordinate model is top-k magnitude") {
  Rng rng(3);
  const AtomModel model = AtomModel::coordinate(9);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::VectorXd v = random_vec(9, rng);
    const auto [support, res] = oracle::best_support_bruteforce(model, v, 3);
    const auto fast = identify(model, v, 3, ProjectionConfig::exact(), rng);
    CHECK(support.indices == fast.support.indices);
    const Eigen::VectorXd proj = project(model, v, support);
    CHECK(res == doctest::Approx((v - proj).norm()).epsilon(1e-12));
  }
}

TEST_CASE("brute force picks the more correlated of two collinear atoms") {
  Eigen::MatrixXd D(2, 2);
  D.col(0) << 1, 0;
  D.col(1) << std::sqrt(0.5), std::sqrt(0.5);
  const AtomModel model = AtomModel::finite_dictionary(D);
  Eigen::VectorXd v(2);
  v << 1, 2;
  const auto [support, res] = oracle::best_support_bruteforce(model, v, 1);
  // |<d_1, v>| = 3/sqrt(2) > |<d_0, v>| = 1.
  CHECK(support.indices == std::vector<int>{1});
}

TEST_CASE("greedy dictionary identify never beats the brute force residual") {
  Rng rng(7);
  const AtomModel model =
      AtomModel::finite_dictionary(random_dictionary(6, 8, rng));
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd v = random_vec(6, rng);
    const auto greedy = identify(model, v, 2, ProjectionConfig::greedy(), rng);
    const auto [best, best_res] = oracle::best_support_bruteforce(model, v, 2);
    const Eigen::VectorXd pg = project(model, v, greedy.support);
    CHECK((v - pg).norm() >= best_res - 1e-12);
  }
}

TEST_CASE("verify_eta accepts exact output at eta one") {
  Rng rng(11);
  const AtomModel model = AtomModel::coordinate(8);
  const Eigen::VectorXd v = random_vec(8, rng);
  const auto out = identify(model, v, 3, ProjectionConfig::exact(), rng);
  CHECK(oracle::verify_eta(model, v, 3, out.support, 1.0));
}

TEST_CASE("verify_eta with a huge tolerance accepts any support") {
  Rng rng(13);
  const AtomModel model = AtomModel::coordinate(8);
  const Eigen::VectorXd v = random_vec(8, rng);
  SupportSet worst;
  worst.kind = AtomKind::Coordinate;
  worst.indices = {0};
  CHECK(oracle::verify_eta(model, v, 3, worst, 1e9));
}

TEST_CASE("greedy achieved ratios verify over random dictionaries") {
  Rng rng(17);
  const AtomModel model =
      AtomModel::finite_dictionary(random_dictionary(7, 10, rng));
  double max_eta = 1.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd v = random_vec(7, rng);
    const auto out = identify(model, v, 2, ProjectionConfig::greedy(), rng);
    REQUIRE(out.eta_certified);
    CHECK(oracle::verify_eta(model, v, 2, out.support, out.eta));
    if (std::isfinite(out.eta)) max_eta = std::max(max_eta, out.eta);
  }
  CHECK(max_eta >= 1.0);  // reported for diagnostics
}

TEST_CASE("reference iht converges in one step on a unit-gram design") {
  // Rows scaled so the single-block Gram is the identity.
  const int n = 6, k = 2;
  Eigen::VectorXd w_star = Eigen::VectorXd::Zero(n);
  w_star[1] = 1.5;
  w_star[4] = -2.0;
  const Eigen::MatrixXd A =
      std::sqrt(static_cast<double>(n)) * Eigen::MatrixXd::Identity(n, n);
  const auto obj = BlockObjective::sparse_regression(A, A * w_star, n);
  const RunTrace trace = oracle::reference_iht(obj, k, 1.0, 3, &w_star);
  CHECK(trace.records[0].error < 1e-12);
}

TEST_CASE("reference iht with zero step never moves") {
  Rng rng(19);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
  const auto obj = BlockObjective::sparse_regression(A, random_vec(4, rng), 4);
  const RunTrace trace = oracle::reference_iht(obj, 2, 0.0, 5, nullptr);
  for (const auto& rec : trace.records)
    CHECK(rec.objective == doctest::Approx(trace.records[0].objective));
  CHECK(trace.final_iterate.norm() == 0.0);
}

TEST_CASE("reference gradmp solves an identity instance in one iteration") {
  const int n = 6, k = 2;
  Eigen::VectorXd w_star = Eigen::VectorXd::Zero(n);
  w_star[0] = 3.0;
  w_star[5] = -1.0;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  const auto obj = BlockObjective::sparse_regression(A, w_star, n);
  const RunTrace trace = oracle::reference_gradmp(obj, k, 3, &w_star);
  CHECK(trace.records[0].error < 1e-12);
}

TEST_CASE("finite differences are exact for linear objectives") {
  // One measurement row makes each block value quadratic with a linear
  // gradient; central differences are then exact up to roundoff.
  Eigen::MatrixXd A(1, 3);
  A << 1, -2, 3;
  Eigen::VectorXd y(1);
  y << 4;
  const auto obj = BlockObjective::sparse_regression(A, y, 1);
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd fd = oracle::finite_difference_gradient(obj, w, 0, 1e-4);
  const Eigen::VectorXd g = obj.block_gradient(0, w);
  CHECK((fd - g).norm() < 1e-9);
}

TEST_CASE("central differences are second-order: exact on quadratics") {
  // The h^2 truncation term carries the third derivative, which vanishes for
  // every least-squares block; both step sizes must agree with the analytic
  // gradient to roundoff.
  Rng rng(23);
  Eigen::MatrixXd A(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = rng.gaussian();
  const auto obj = BlockObjective::sparse_regression(A, random_vec(4, rng), 4);
  const Eigen::VectorXd w = random_vec(3, rng);
  const Eigen::VectorXd g = obj.block_gradient(0, w);
  const double e1 =
      (oracle::finite_difference_gradient(obj, w, 0, 1e-3) - g).norm();
  const double e2 =
      (oracle::finite_difference_gradient(obj, w, 0, 5e-4) - g).norm();
  CHECK(e1 < 1e-8);
  CHECK(e2 < 1e-8);
}

TEST_CASE("brute force is permutation invariant") {
  Rng rng(29);
  const int n = 7;
  const AtomModel model = AtomModel::coordinate(n);
  const Eigen::VectorXd v = random_vec(n, rng);
  const auto [support, res] = oracle::best_support_bruteforce(model, v, 2);

  // Reverse the coordinate order and map the optimum back.
  Eigen::VectorXd rev(n);
  for (int i = 0; i < n; ++i) rev[i] = v[n - 1 - i];
  const auto [rsupport, rres] = oracle::best_support_bruteforce(model, rev, 2);
  std::vector<int> mapped;
  for (int idx : rsupport.indices) mapped.push_back(n - 1 - idx);
  std::sort(mapped.begin(), mapped.end());
  CHECK(mapped == support.indices);
  CHECK(res == doctest::Approx(rres).epsilon(1e-12));
}

TEST_CASE("budget violations hard-fail") {
  Rng rng(31);
  const AtomModel model = AtomModel::coordinate(64);
  const Eigen::VectorXd v = random_vec(64, rng);
  oracle::OracleBudget tight;
  tight.max_subsets = 10;
  CHECK_THROWS_AS(oracle::best_support_bruteforce(model, v, 3, tight),
                  std::runtime_error);

  const auto obj = BlockObjective::sparse_regression(
      Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4), 4);
  oracle::OracleBudget small_dim;
  small_dim.max_dim = 2;
  CHECK_THROWS_AS(oracle::finite_difference_gradient(
                      obj, Eigen::VectorXd::Zero(4), 0, 1e-6, small_dim),
                  std::runtime_error);
}
