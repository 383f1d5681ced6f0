#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphssl/error.hpp"

namespace graphssl {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double>;  // column-major, sorted inner indices
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Edge weights at or below this value are treated as absent.
inline constexpr double kMinEdgeWeight = 1e-12;

struct Edge {
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;
};

/// c_ij = 1/a_ij on the support of A; nothing stored elsewhere.
inline SparseMatrix default_costs(const SparseMatrix& adjacency) {
  SparseMatrix costs = adjacency;
  for (Index k = 0; k < costs.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(costs, k); it; ++it) it.valueRef() = 1.0 / it.value();
  return costs;
}

/// Undirected weighted graph without self-loops. Immutable once built.
class Graph {
 public:
  Graph() = default;

  explicit Graph(SparseMatrix adjacency) : Graph(adjacency, default_costs(adjacency)) {}

  Graph(SparseMatrix adjacency, SparseMatrix costs)
      : adjacency_(std::move(adjacency)), costs_(std::move(costs)) {
    adjacency_.makeCompressed();
    costs_.makeCompressed();
    validate();
    degrees_ = VectorXd::Zero(adjacency_.rows());
    for (Index k = 0; k < adjacency_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(adjacency_, k); it; ++it) degrees_(it.row()) += it.value();
    volume_ = degrees_.sum();
  }

  Index n() const { return adjacency_.rows(); }
  const SparseMatrix& adjacency() const { return adjacency_; }
  const SparseMatrix& costs() const { return costs_; }
  const VectorXd& degrees() const { return degrees_; }
  /// a_••, the sum of all adjacency entries.
  double volume() const { return volume_; }
  Index edge_count() const { return adjacency_.nonZeros() / 2; }

  /// Component id per node (ids in order of lowest member).
  std::vector<Index> components() const {
    std::vector<Index> comp(static_cast<std::size_t>(n()), -1);
    Index next = 0;
    for (Index s = 0; s < n(); ++s) {
      if (comp[s] >= 0) continue;
      std::queue<Index> q;
      q.push(s);
      comp[s] = next;
      while (!q.empty()) {
        Index u = q.front();
        q.pop();
        for (SparseMatrix::InnerIterator it(adjacency_, u); it; ++it) {
          if (comp[it.row()] < 0) {
            comp[it.row()] = next;
            q.push(it.row());
          }
        }
      }
      ++next;
    }
    return comp;
  }

  bool is_connected() const {
    if (n() == 0) return false;
    auto comp = components();
    return std::all_of(comp.begin(), comp.end(), [](Index c) { return c == 0; });
  }

 private:
  void validate() const {
    if (adjacency_.rows() != adjacency_.cols()) throw invalid_input("adjacency must be square");
    if (costs_.rows() != adjacency_.rows() || costs_.cols() != adjacency_.cols())
      throw invalid_input("cost matrix shape differs from adjacency");
    for (Index k = 0; k < adjacency_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(adjacency_, k); it; ++it) {
        if (it.row() == it.col()) throw invalid_input("self-loop in adjacency");
        if (!(it.value() > 0.0) || !std::isfinite(it.value()))
          throw invalid_input("adjacency entries must be positive and finite");
        if (adjacency_.coeff(it.col(), it.row()) != it.value())
          throw invalid_input("adjacency is not symmetric");
        double c = costs_.coeff(it.row(), it.col());
        if (!(c > 0.0) || !std::isfinite(c)) throw invalid_input("cost must be positive and finite on every edge");
      }
    }
    if (costs_.nonZeros() != adjacency_.nonZeros())
      throw invalid_input("costs must be stored exactly on the adjacency support");
  }

  SparseMatrix adjacency_;
  SparseMatrix costs_;
  VectorXd degrees_;
  double volume_ = 0.0;
};

struct BuildOptions {
  bool symmetrize = true;
  bool keep_largest_component = true;
  /// Total node count; defaults to 1 + the largest id in the edge list.
  std::optional<Index> node_count;
};

struct BuiltGraph {
  Graph graph;
  /// new id -> original id
  std::vector<Index> kept;
  /// original id -> new id, or -1 when dropped
  std::vector<Index> old_to_new;
};

/// Assemble a graph from (src, dst, weight) triples. Duplicate arcs are summed,
/// self-loops dropped, A = (A + Aᵀ)/2 applied when symmetrizing, and only the
/// largest connected component is kept when requested.
inline BuiltGraph build_graph(std::span<const Edge> edges, const BuildOptions& options = {}) {
  if (edges.empty()) throw invalid_input("empty edge list");
  Index max_id = -1;
  for (const auto& e : edges) {
    if (e.src < 0 || e.dst < 0) throw invalid_input("negative node id");
    if (e.weight < 0.0 || !std::isfinite(e.weight)) throw invalid_input("negative or non-finite edge weight");
    max_id = std::max({max_id, e.src, e.dst});
  }
  Index n = options.node_count.value_or(max_id + 1);
  if (n <= max_id) throw invalid_input("node id exceeds node_count");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size());
  for (const auto& e : edges)
    if (e.src != e.dst) triplets.emplace_back(e.src, e.dst, e.weight);
  SparseMatrix raw(n, n);
  raw.setFromTriplets(triplets.begin(), triplets.end());

  SparseMatrix sym;
  if (options.symmetrize) {
    SparseMatrix t = raw.transpose();
    sym = (raw + t) * 0.5;
  } else {
    sym = raw;
    SparseMatrix t = raw.transpose();
    if (!(SparseMatrix(sym - t).norm() == 0.0))
      throw invalid_input("edge list is directed; enable symmetrize");
  }
  sym.prune([](Index, Index, double v) { return v > kMinEdgeWeight; });
  sym.makeCompressed();

  BuiltGraph out;
  out.old_to_new.assign(static_cast<std::size_t>(n), -1);
  if (!options.keep_largest_component) {
    for (Index i = 0; i < n; ++i) {
      out.kept.push_back(i);
      out.old_to_new[i] = i;
    }
    out.graph = Graph(std::move(sym));
    return out;
  }

  Graph full(sym);
  auto comp = full.components();
  Index ncomp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<Index> sizes(static_cast<std::size_t>(ncomp), 0);
  for (Index c : comp) ++sizes[c];
  // Ties go to the component holding the lowest node id (lowest component id).
  Index best = static_cast<Index>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (Index i = 0; i < n; ++i) {
    if (comp[i] == best) {
      out.old_to_new[i] = static_cast<Index>(out.kept.size());
      out.kept.push_back(i);
    }
  }
  if (static_cast<Index>(out.kept.size()) == n) {
    out.graph = std::move(full);
    return out;
  }
  std::vector<Eigen::Triplet<double>> sub;
  for (Index k = 0; k < sym.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sym, k); it; ++it) {
      Index r = out.old_to_new[it.row()], c = out.old_to_new[it.col()];
      if (r >= 0 && c >= 0) sub.emplace_back(r, c, it.value());
    }
  Index m = static_cast<Index>(out.kept.size());
  SparseMatrix a(m, m);
  a.setFromTriplets(sub.begin(), sub.end());
  out.graph = Graph(std::move(a));
  return out;
}

/// Induced subgraph on `nodes` (kept in the given order).
inline Graph induced_subgraph(const Graph& g, std::span<const Index> nodes) {
  std::vector<Index> pos(static_cast<std::size_t>(g.n()), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = static_cast<Index>(i);
  std::vector<Eigen::Triplet<double>> a, c;
  for (Index k = 0; k < g.adjacency().outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(g.adjacency(), k); it; ++it) {
      Index r = pos[it.row()], col = pos[it.col()];
      if (r >= 0 && col >= 0) {
        a.emplace_back(r, col, it.value());
        c.emplace_back(r, col, g.costs().coeff(it.row(), it.col()));
      }
    }
  auto m = static_cast<Index>(nodes.size());
  SparseMatrix am(m, m), cm(m, m);
  am.setFromTriplets(a.begin(), a.end());
  cm.setFromTriplets(c.begin(), c.end());
  return Graph(std::move(am), std::move(cm));
}

namespace detail {
inline void require_positive_degrees(const Graph& g) {
  for (Index i = 0; i < g.n(); ++i)
    if (!(g.degrees()(i) > 0.0))
      throw invalid_input("node " + std::to_string(i) + " has zero degree");
}
}  // namespace detail

/// L = D − A.
inline SparseMatrix laplacian(const Graph& g) {
  detail::require_positive_degrees(g);
  SparseMatrix d(g.n(), g.n());
  d.reserve(Eigen::VectorXi::Constant(g.n(), 1));
  for (Index i = 0; i < g.n(); ++i) d.insert(i, i) = g.degrees()(i);
  SparseMatrix l = d - g.adjacency();
  l.makeCompressed();
  return l;
}

/// Row-stochastic natural random walk P = D⁻¹A.
inline SparseMatrix transition_matrix(const Graph& g) {
  detail::require_positive_degrees(g);
  SparseMatrix p = g.adjacency();
  for (Index k = 0; k < p.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p, k); it; ++it) it.valueRef() /= g.degrees()(it.row());
  return p;
}

}  // namespace graphssl
