#pragma once

#include <random>
#include <vector>

#include "graphssl/graphssl.hpp"

namespace testing_support {

using graphssl::Edge;
using graphssl::Graph;
using graphssl::Index;

inline Graph from_edges(Index n, const std::vector<Edge>& edges) {
  graphssl::BuildOptions opt;
  opt.node_count = n;
  opt.keep_largest_component = false;
  std::vector<Edge> both;
  for (const auto& e : edges) {
    both.push_back(e);
    both.push_back({e.dst, e.src, e.weight});
  }
  return graphssl::build_graph(both, opt).graph;
}

inline Graph k2() { return from_edges(2, {{0, 1, 1.0}}); }
inline Graph path(Index n) {
  std::vector<Edge> e;
  for (Index i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return from_edges(n, e);
}
inline Graph triangle() { return from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}); }

/// Random connected weighted graph: a random spanning tree plus extra edges.
inline Graph random_connected(std::mt19937_64& rng, Index n, double extra_density = 0.2, bool weighted = true) {
  std::uniform_real_distribution<double> w(0.2, 2.0), u(0.0, 1.0);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<char>> has(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  std::vector<Edge> edges;
  auto add = [&](Index a, Index b) {
    if (a == b || has[a][b]) return;
    has[a][b] = has[b][a] = 1;
    edges.push_back({a, b, weighted ? w(rng) : 1.0});
  };
  for (Index i = 1; i < n; ++i) {
    std::uniform_int_distribution<Index> pick(0, i - 1);
    add(order[i], order[pick(rng)]);
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (u(rng) < extra_density) add(i, j);
  return from_edges(n, edges);
}

inline graphssl::LabeledSet labeled(std::vector<Index> nodes, std::vector<int> labels, int q) {
  graphssl::LabeledSet s;
  s.nodes = std::move(nodes);
  s.labels = std::move(labels);
  s.num_classes = q;
  return s;
}

/// Two unit-weight cliques of size m joined through one bridge node (index 2m).
inline Graph cliques_with_bridge(Index m) {
  std::vector<Edge> e;
  for (Index b = 0; b < 2; ++b)
    for (Index i = 0; i < m; ++i)
      for (Index j = i + 1; j < m; ++j) e.push_back({b * m + i, b * m + j, 1.0});
  e.push_back({0, 2 * m, 1.0});
  e.push_back({m, 2 * m, 1.0});
  return from_edges(2 * m + 1, e);
}

/// Silences library warnings for the lifetime of the guard and counts them.
struct WarningCapture {
  std::vector<std::string> messages;
  graphssl::warning_sink previous;
  WarningCapture() {
    previous = graphssl::set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { graphssl::set_warning_sink(std::move(previous)); }
};

}  // namespace testing_support
