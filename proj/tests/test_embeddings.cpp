#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "support.hpp"

using namespace graphssl;

namespace {

MatrixXd centering(Index n) {
  return MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

EigOptions lanczos() {
  EigOptions o;
  o.strategy = EigStrategy::lanczos;
  return o;
}

}  // namespace

TEST(Eigensolver, DiagonalLargest) {
  MatrixXd m = VectorXd((VectorXd(3) << 3, 2, 1).finished()).asDiagonal();
  auto r = symmetric_eigs(make_operator(m), 2, Which::largest);
  EXPECT_NEAR(r.values(0), 3.0, 1e-12);
  EXPECT_NEAR(r.values(1), 2.0, 1e-12);
}

TEST(Eigensolver, CenteredK2) {
  MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  auto r = symmetric_eigs(make_operator(a), 1, Which::largest, Subspace::centered);
  EXPECT_NEAR(r.values(0), -1.0, 1e-12);
  EXPECT_NEAR(std::fabs(r.vectors(0, 0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.vectors(0, 0), -r.vectors(1, 0), 1e-12);
}

TEST(Eigensolver, LanczosMatchesDenseOnRandomSymmetric) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 5; ++t) {
    MatrixXd b(20, 20);
    for (Index i = 0; i < 20; ++i)
      for (Index j = 0; j < 20; ++j) b(i, j) = gauss(rng);
    const MatrixXd m = b + b.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> full(m);
    for (Which w : {Which::largest, Which::smallest}) {
      auto r = symmetric_eigs(make_operator(m), 4, w, Subspace::full, lanczos());
      for (Index i = 0; i < 4; ++i) {
        const double want = w == Which::largest ? full.eigenvalues()(19 - i) : full.eigenvalues()(i);
        EXPECT_NEAR(r.values(i), want, 1e-8);
        EXPECT_LT((m * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm(), 1e-7);
      }
    }
  }
}

TEST(Eigensolver, RejectsBadCounts) {
  MatrixXd m = MatrixXd::Identity(3, 3);
  EXPECT_THROW(symmetric_eigs(make_operator(m), 0, Which::largest), invalid_input);
  EXPECT_THROW(symmetric_eigs(make_operator(m), 3, Which::largest), invalid_input);
}

TEST(Embeddings, K2HandValues) {
  auto g = testing_support::k2();
  auto m = moran_embedding(g, 1);
  EXPECT_NEAR(m.eigenvalues(0), -1.0, 1e-12);
  EXPECT_NEAR(moran_index(g, m.scores.col(0)), -1.0, 1e-12);
  auto c = geary_embedding(g, 1);
  EXPECT_NEAR(c.eigenvalues(0), 2.0, 1e-12);
  EXPECT_NEAR(c.scores(0, 0), -c.scores(1, 0), 1e-12);
  auto l = lpca_embedding(g, 1);
  EXPECT_NEAR(l.eigenvalues(0), 4.0, 1e-12);
  EXPECT_NEAR(l.scores(0, 0), -l.scores(1, 0), 1e-12);
  auto b = bop_modularity_embedding(g, std::log(2.0), 1);
  EXPECT_NEAR(b.eigenvalues(0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(b.scores(0, 0), -b.scores(1, 0), 1e-12);
}

TEST(Embeddings, EigenIndexIdentitiesOnRandomGraphs) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Index> size(6, 30);
  for (int t = 0; t < 20; ++t) {
    auto g = testing_support::random_connected(rng, size(rng));
    const double n = static_cast<double>(g.n()), vol = g.volume();
    const Index p = std::max<Index>(1, g.n() / 3);
    auto m = moran_embedding(g, p);
    auto c = geary_embedding(g, p);
    auto l = lpca_embedding(g, p);
    for (Index i = 0; i < p; ++i) {
      EXPECT_NEAR(moran_index(g, m.scores.col(i)), n / vol * m.eigenvalues(i), 1e-8);
      EXPECT_NEAR(geary_index(g, c.scores.col(i)), (n - 1) / vol * c.eigenvalues(i), 1e-8);
      EXPECT_NEAR(contiguity_ratio(g, l.scores.col(i)), l.eigenvalues(i), 1e-8);
    }
  }
}

TEST(Embeddings, MatchDenseOracle) {
  std::mt19937_64 rng(8);
  auto g = testing_support::random_connected(rng, 25);
  const Index n = g.n();
  const MatrixXd h = centering(n);
  const MatrixXd a(g.adjacency());
  const MatrixXd lap(laplacian(g));
  const MatrixXd r = MatrixXd::Identity(n, n) - MatrixXd(transition_matrix(g));
  // Work inside an orthonormal basis of 1^⊥ so the constant direction cannot appear.
  Eigen::SelfAdjointEigenSolver<MatrixXd> hs(h);
  const MatrixXd basis = hs.eigenvectors().rightCols(n - 1);
  auto restricted = [&](const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(basis.transpose() * m * basis);
    return VectorXd(es.eigenvalues());
  };
  const VectorXd em = restricted(a), eg = restricted(lap), el = restricted(r.transpose() * r);
  auto m = moran_embedding(g, 5), c = geary_embedding(g, 5), l = lpca_embedding(g, 5);
  for (Index i = 0; i < 5; ++i) {
    EXPECT_NEAR(m.eigenvalues(i), em(n - 2 - i), 1e-9);
    EXPECT_NEAR(c.eigenvalues(i), eg(i), 1e-9);
    EXPECT_NEAR(l.eigenvalues(i), el(i), 1e-9);
  }
}

TEST(Embeddings, LanczosAgreesWithDenseOnLargerGraph) {
  synthetic::SbmSpec s;
  s.n = 300;
  auto g = synthetic::sbm(s).graph;
  EigOptions dense;
  dense.strategy = EigStrategy::dense;
  for (auto kind : {EmbeddingKind::moran, EmbeddingKind::geary, EmbeddingKind::lpca}) {
    EmbeddingSpec spec{kind, 0.02, 1.0};
    auto a = compute_embedding(g, spec, lanczos());
    auto b = compute_embedding(g, spec, dense);
    ASSERT_EQ(a.scores.cols(), 6);
    for (Index i = 0; i < a.scores.cols(); ++i) EXPECT_NEAR(a.eigenvalues(i), b.eigenvalues(i), 1e-7);
    // the leading direction is well separated on this graph
    EXPECT_GT(std::fabs(a.scores.col(0).dot(b.scores.col(0))), 1.0 - 1e-6);
  }
}

TEST(Embeddings, LeadingColumnSeparatesBlocks) {
  auto b = synthetic::sbm({});
  for (auto kind : {EmbeddingKind::moran, EmbeddingKind::geary, EmbeddingKind::lpca, EmbeddingKind::bop_modularity}) {
    auto e = compute_embedding(b.graph, {kind, 0.01, 1.0});
    Index agree = 0;
    for (Index i = 0; i < b.n(); ++i) agree += (e.scores(i, 0) > 0) == (b.labels[i] == 0);
    const double frac = static_cast<double>(std::max(agree, b.n() - agree)) / static_cast<double>(b.n());
    EXPECT_GE(frac, 0.9) << to_string(kind);
  }
}

TEST(Embeddings, GearyColumnOnPathIsMonotone) {
  auto e = geary_embedding(testing_support::path(4), 1);
  const VectorXd x = e.scores.col(0);
  const bool up = x(0) < x(1) && x(1) < x(2) && x(2) < x(3);
  const bool down = x(0) > x(1) && x(1) > x(2) && x(2) > x(3);
  EXPECT_TRUE(up || down);
}

TEST(Embeddings, DimensionChecks) {
  EXPECT_EQ(embedding_dimension(400, 0.05), 20);
  EXPECT_EQ(embedding_dimension(2, 0.5), 1);
  EXPECT_THROW(embedding_dimension(10, 0.0), invalid_input);
  EXPECT_THROW(embedding_dimension(10, 1.0), invalid_input);
  EXPECT_THROW(lpca_embedding(testing_support::path(3), 0), invalid_input);
  EXPECT_EQ(parse_embedding_kind("bopmod"), EmbeddingKind::bop_modularity);
}
