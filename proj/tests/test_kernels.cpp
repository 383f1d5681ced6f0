#include <gtest/gtest.h>

#include "support.hpp"

using namespace graphssl;
using testing_support::labeled;

namespace {

// (D − αA)⁻¹ = Σ_t (αP)ᵗ D⁻¹, truncated once the terms fall below tol.
MatrixXd neumann(const Graph& g, double alpha, double tol) {
  const Index n = g.n();
  const MatrixXd p = alpha * MatrixXd(transition_matrix(g));
  const MatrixXd dinv = g.degrees().cwiseInverse().asDiagonal();
  MatrixXd term = dinv, sum = dinv;
  while (term.cwiseAbs().maxCoeff() > tol) {
    term = p * term;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(Rctk, K2) {
  auto k = rctk(testing_support::k2(), 0.5).k;
  MatrixXd want(2, 2);
  want << 4.0 / 3, 2.0 / 3, 2.0 / 3, 4.0 / 3;
  EXPECT_LT((k - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rctk, P3Entries) {
  auto k = rctk(testing_support::path(3), 0.5).k;
  EXPECT_NEAR(k(2, 0), 1.0 / 6, 1e-12);
  EXPECT_NEAR(k(2, 1), 1.0 / 3, 1e-12);
  EXPECT_NEAR(k(0, 1), 1.0 / 3, 1e-12);
}

TEST(Rctk, MatchesNeumannSeries) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    auto g = testing_support::random_connected(rng, 4 + 2 * t % 17);
    const MatrixXd k = rctk(g, 0.5).k;
    EXPECT_LT((k - neumann(g, 0.5, 1e-14)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Rctk, PositiveDefiniteAndSmallAlphaLimit) {
  std::mt19937_64 rng(21);
  auto g = testing_support::random_connected(rng, 15);
  for (double a : {0.1, 0.5, 0.9, 0.99}) {
    const MatrixXd k = rctk(g, a).k;
    Eigen::LLT<MatrixXd> llt(k);
    EXPECT_EQ(llt.info(), Eigen::Success);
  }
  const MatrixXd dinv = g.degrees().cwiseInverse().asDiagonal();
  EXPECT_LT((rctk(g, 1e-6).k - dinv).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Rctk, SingularAndInvalidAlpha) {
  auto g = testing_support::path(4);
  EXPECT_THROW(rctk(g, 1.0), solve_failure);
  EXPECT_THROW(rctk(g, 0.0), invalid_input);
  EXPECT_THROW(rctk(g, 1.5), invalid_input);
  EXPECT_THROW(rctk(g, 0.5, 3), capacity_exceeded);
}

TEST(LinearKernel, HandValues) {
  EXPECT_EQ(linear_feature_kernel(MatrixXd::Identity(3, 3)).k, MatrixXd::Identity(3, 3));
  MatrixXd x(2, 1);
  x << 1, 2;
  MatrixXd want(2, 2);
  want << 1, 2, 2, 4;
  EXPECT_EQ(linear_feature_kernel(x).k, want);
}

TEST(LinearKernel, MatchesProduct) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  MatrixXd x(12, 5);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  EXPECT_LT((linear_feature_kernel(x).k - x * x.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SumOfSimilarities, PathHandCases) {
  auto g = testing_support::path(3);
  auto k = rctk(g, 0.5);
  std::vector<Index> t3{2};
  auto r = sum_of_similarities_classify(k, labeled({0, 1}, {0, 1}, 2), t3);
  EXPECT_EQ(r.labels[0], 1);
  EXPECT_NEAR(r.scores(0, 0), 1.0 / 6, 1e-12);
  EXPECT_NEAR(r.scores(0, 1), 1.0 / 3, 1e-12);
  std::vector<Index> t2{1};
  auto tie = sum_of_similarities_classify(k, labeled({0, 2}, {0, 1}, 2), t2);
  EXPECT_NEAR(tie.scores(0, 0), 1.0 / 3, 1e-12);
  EXPECT_NEAR(tie.scores(0, 1), 1.0 / 3, 1e-12);
  EXPECT_EQ(tie.labels[0], 0);
  auto one = sum_of_similarities_classify(k, labeled({0}, {0}, 1), t2);
  EXPECT_EQ(one.labels[0], 0);
}

TEST(SumOfSimilarities, SolvePathAgreesWithKernel) {
  std::mt19937_64 rng(44);
  auto g = testing_support::random_connected(rng, 20);
  auto lab = labeled({0, 3, 5, 9, 12}, {0, 1, 2, 1, 0}, 3);
  std::vector<Index> targets{1, 2, 4, 6, 7, 8, 10, 11, 13, 19};
  auto a = sum_of_similarities_classify(rctk(g, 0.7), lab, targets);
  auto b = rctk_sum_of_similarities_classify(g, 0.7, lab, targets);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_LT((a.scores - b.scores).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SumOfSimilarities, RankOracle) {
  // scores are K restricted to (targets, class members) summed per class
  std::mt19937_64 rng(45);
  auto g = testing_support::random_connected(rng, 16);
  auto k = rctk(g, 0.4);
  auto lab = labeled({0, 1, 2, 3}, {0, 1, 1, 0}, 2);
  std::vector<Index> targets{4, 5, 6, 7, 8, 9};
  SumOfSimilaritiesOptions norm;
  norm.class_mass_normalization = true;
  auto r = sum_of_similarities_classify(k, lab, targets, norm);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Index i = targets[t];
    const double s0 = (k.k(i, 0) + k.k(i, 3)) / 2, s1 = (k.k(i, 1) + k.k(i, 2)) / 2;
    EXPECT_NEAR(r.scores(static_cast<Index>(t), 0), s0, 1e-14);
    EXPECT_NEAR(r.scores(static_cast<Index>(t), 1), s1, 1e-14);
    EXPECT_EQ(r.labels[t], s1 > s0 ? 1 : 0);
  }
}

TEST(SumOfSimilarities, CliquesWithBridge) {
  const Index m = 7;
  auto g = testing_support::cliques_with_bridge(m);
  auto lab = labeled({3, m + 3}, {0, 1}, 2);
  std::vector<Index> targets;
  for (Index i = 0; i < 2 * m; ++i)
    if (i != 3 && i != m + 3) targets.push_back(i);
  auto r = rctk_sum_of_similarities_classify(g, 0.9, lab, targets);
  for (std::size_t t = 0; t < targets.size(); ++t) EXPECT_EQ(r.labels[t], targets[t] < m ? 0 : 1);
}
