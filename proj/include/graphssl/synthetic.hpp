#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "graphssl/dataset.hpp"
#include "graphssl/graph.hpp"

namespace graphssl::synthetic {

/// Stochastic block model whose blocks are the classes; features are
/// independent sparse binary noise.
struct SbmSpec {
  Index n = 400;
  int blocks = 2;
  double p_in = 0.05;
  double p_out = 0.004;
  Index features = 100;
  double feature_density = 0.1;
  std::uint64_t seed = 1;
};

/// Gaussian class blobs in feature space on a near-random graph.
struct BlobSpec {
  Index n = 400;
  int classes = 3;
  Index features = 100;
  /// Leading features whose mean depends on the class.
  Index informative = 10;
  double separation = 3.0;
  /// Expected degree of the random part of the graph.
  double mean_degree = 6.0;
  std::uint64_t seed = 2;
};

namespace detail {

inline DatasetBundle finish(std::vector<Edge>& edges, MatrixXd features, std::vector<int> labels, int q,
                            std::string name) {
  // list both directions so symmetrization keeps unit weights
  const std::size_t m = edges.size();
  for (std::size_t k = 0; k < m; ++k) edges.push_back({edges[k].dst, edges[k].src, edges[k].weight});
  BuildOptions opt;
  opt.node_count = static_cast<Index>(labels.size());
  auto built = build_graph(edges, opt);
  if (built.graph.n() != opt.node_count) throw invalid_input("generator produced a disconnected graph");
  DatasetBundle b;
  b.graph = std::move(built.graph);
  b.features = std::move(features);
  b.labels = std::move(labels);
  for (int c = 0; c < q; ++c) b.class_ids.push_back(c);
  for (Index i = 0; i < b.graph.n(); ++i) b.node_ids.push_back(i);
  b.name = std::move(name);
  b.validate();
  return b;
}

/// Joins every component to the one holding node 0 (or, for SBM, to a node of
/// the same block) so that the generated graph is connected.
inline void connect_components(Index n, std::vector<Edge>& edges, const std::vector<int>& block,
                               std::mt19937_64& rng) {
  std::vector<Index> parent(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) parent[i] = i;
  std::function<Index(Index)> find = [&](Index v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  for (const auto& e : edges) parent[find(e.src)] = find(e.dst);
  const Index root = find(0);
  for (Index v = 0; v < n; ++v) {
    if (find(v) == root) continue;
    // link v's component to a random node of the same block already in the main component
    std::vector<Index> candidates;
    for (Index u = 0; u < n; ++u)
      if (find(u) == root && block[u] == block[v]) candidates.push_back(u);
    if (candidates.empty())
      for (Index u = 0; u < n; ++u)
        if (find(u) == root) candidates.push_back(u);
    const Index u = candidates[rng() % candidates.size()];
    edges.push_back({v, u, 1.0});
    parent[find(v)] = root;
  }
}

}  // namespace detail

inline DatasetBundle sbm(const SbmSpec& s) {
  if (s.n < 2 || s.blocks < 2 || s.features < 1) throw invalid_input("invalid SBM spec");
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> labels(static_cast<std::size_t>(s.n));
  for (Index i = 0; i < s.n; ++i) labels[i] = static_cast<int>(i * s.blocks / s.n);
  std::vector<Edge> edges;
  for (Index i = 0; i < s.n; ++i)
    for (Index j = i + 1; j < s.n; ++j)
      if (u(rng) < (labels[i] == labels[j] ? s.p_in : s.p_out)) edges.push_back({i, j, 1.0});
  detail::connect_components(s.n, edges, labels, rng);
  MatrixXd x = MatrixXd::Zero(s.n, s.features);
  for (Index i = 0; i < s.n; ++i)
    for (Index j = 0; j < s.features; ++j)
      if (u(rng) < s.feature_density) x(i, j) = 1.0;
  return detail::finish(edges, std::move(x), std::move(labels), s.blocks, "sbm");
}

inline DatasetBundle blobs(const BlobSpec& s) {
  if (s.n < 2 || s.classes < 2 || s.features < 1 || s.informative > s.features) throw invalid_input("invalid blob spec");
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<int> labels(static_cast<std::size_t>(s.n));
  for (Index i = 0; i < s.n; ++i) labels[i] = static_cast<int>(i % s.classes);
  // class c is shifted along a distinct set of informative coordinates
  MatrixXd means = MatrixXd::Zero(s.classes, s.features);
  for (int c = 0; c < s.classes; ++c)
    for (Index j = 0; j < s.informative; ++j)
      if (j % s.classes == c) means(c, j) = s.separation;
  MatrixXd x(s.n, s.features);
  for (Index i = 0; i < s.n; ++i)
    for (Index j = 0; j < s.features; ++j) x(i, j) = means(labels[i], j) + normal(rng);

  std::vector<Edge> edges;
  const double p = s.mean_degree / static_cast<double>(s.n - 1);
  for (Index i = 0; i < s.n; ++i)
    for (Index j = i + 1; j < s.n; ++j)
      if (u(rng) < p) edges.push_back({i, j, 1.0});
  // random ring keeps the graph connected without aligning it with classes
  std::vector<Index> perm(static_cast<std::size_t>(s.n));
  for (Index i = 0; i < s.n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  for (Index i = 0; i < s.n; ++i) edges.push_back({perm[i], perm[(i + 1) % s.n], 1.0});
  return detail::finish(edges, std::move(x), std::move(labels), s.classes, "blobs");
}

}  // namespace graphssl::synthetic
