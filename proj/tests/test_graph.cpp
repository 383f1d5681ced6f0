#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

using namespace graphssl;
using testing_support::from_edges;

TEST(BuildGraph, SymmetrizesSingleArc) {
  std::vector<Edge> e{{0, 1, 1.0}};
  auto g = build_graph(e).graph;
  EXPECT_DOUBLE_EQ(g.adjacency().coeff(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(g.adjacency().coeff(1, 0), 0.5);
}

TEST(BuildGraph, KeepsLargestComponent) {
  std::vector<Edge> e{{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}, {6, 7, 1}};
  for (auto& x : std::vector<Edge>(e)) e.push_back({x.dst, x.src, x.weight});
  auto built = build_graph(e);
  EXPECT_EQ(built.graph.n(), 3);
  EXPECT_EQ(built.kept.size(), 3u);
  EXPECT_EQ(built.kept, (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(built.old_to_new[4], -1);
  EXPECT_TRUE(built.graph.is_connected());
}

TEST(BuildGraph, DropsSelfLoops) {
  std::vector<Edge> e{{0, 1, 1}, {1, 0, 1}, {1, 1, 5}};
  auto g = build_graph(e).graph;
  EXPECT_EQ(g.adjacency().coeff(1, 1), 0.0);
  EXPECT_EQ(g.edge_count(), 1);
}

TEST(BuildGraph, RejectsBadInput) {
  std::vector<Edge> empty;
  EXPECT_THROW(build_graph(empty), invalid_input);
  std::vector<Edge> neg{{0, 1, -1.0}};
  EXPECT_THROW(build_graph(neg), invalid_input);
  std::vector<Edge> directed{{0, 1, 1.0}};
  BuildOptions strict;
  strict.symmetrize = false;
  EXPECT_THROW(build_graph(directed, strict), invalid_input);
}

TEST(Graph, CostsAreReciprocalAffinities) {
  auto g = from_edges(3, {{0, 1, 0.5}, {1, 2, 4.0}});
  EXPECT_DOUBLE_EQ(g.costs().coeff(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(g.costs().coeff(2, 1), 0.25);
  auto k2 = testing_support::k2();
  EXPECT_DOUBLE_EQ(k2.costs().coeff(0, 1), 1.0);
}

TEST(Graph, LaplacianAndTransition) {
  auto g = testing_support::k2();
  MatrixXd l = MatrixXd(laplacian(g));
  MatrixXd p = MatrixXd(transition_matrix(g));
  EXPECT_EQ(l, (MatrixXd(2, 2) << 1, -1, -1, 1).finished());
  EXPECT_EQ(p, (MatrixXd(2, 2) << 0, 1, 1, 0).finished());
  auto p3 = MatrixXd(transition_matrix(testing_support::path(3)));
  EXPECT_DOUBLE_EQ(p3(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(p3(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(p3(1, 2), 0.5);
}

TEST(Graph, LaplacianAnnihilatesOnesOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    auto g = testing_support::random_connected(rng, 5 + t);
    VectorXd r = laplacian(g) * VectorXd::Ones(g.n());
    EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-12);
    VectorXd rows = transition_matrix(g) * VectorXd::Ones(g.n());
    EXPECT_LT((rows.array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(Graph, RejectsAsymmetricAdjacency) {
  SparseMatrix a(2, 2);
  a.insert(0, 1) = 1.0;
  EXPECT_THROW(Graph{a}, invalid_input);
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "graphssl_test_dataset";
  std::filesystem::remove_all(dir);
  synthetic::SbmSpec s;
  s.n = 60;
  s.features = 8;
  auto b = synthetic::sbm(s);
  io::save_dataset(b, dir);
  auto back = io::load_dataset(dir);
  EXPECT_EQ(back.n(), b.n());
  EXPECT_EQ(back.labels, b.labels);
  EXPECT_EQ(back.num_classes(), b.num_classes());
  EXPECT_LT((back.features - b.features).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(MatrixXd(back.graph.adjacency() - b.graph.adjacency()).cwiseAbs().maxCoeff(), 1e-12);
  std::filesystem::remove_all(dir);
}
