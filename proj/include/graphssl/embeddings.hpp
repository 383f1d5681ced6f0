#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "graphssl/bop.hpp"
#include "graphssl/eigensolver.hpp"
#include "graphssl/graph.hpp"

namespace graphssl {

enum class EmbeddingKind { moran, geary, lpca, bop_modularity };

inline std::string_view to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::moran: return "moran";
    case EmbeddingKind::geary: return "geary";
    case EmbeddingKind::lpca: return "lpca";
    case EmbeddingKind::bop_modularity: return "bopmod";
  }
  return "?";
}

inline EmbeddingKind parse_embedding_kind(std::string_view s) {
  if (s == "moran") return EmbeddingKind::moran;
  if (s == "geary") return EmbeddingKind::geary;
  if (s == "lpca") return EmbeddingKind::lpca;
  if (s == "bopmod" || s == "bop_modularity") return EmbeddingKind::bop_modularity;
  throw invalid_input("unknown embedding kind '" + std::string(s) + "'");
}

struct EmbeddingSpec {
  EmbeddingKind kind = EmbeddingKind::moran;
  /// Fraction of the node count; the default grid is {0.05, 0.10, 0.20, 0.35, 0.50}.
  double p_fraction = 0.05;
  /// Inverse temperature, bop_modularity only.
  double theta = 1.0;
};

/// n × p structural scores, one column per eigenvector, most relevant first.
struct Embedding {
  MatrixXd scores;
  VectorXd eigenvalues;
};

/// p = round(p_fraction · n), required to lie in [1, n−1].
inline Index embedding_dimension(Index n, double p_fraction) {
  if (!(p_fraction > 0.0)) throw invalid_input("embedding size must be positive");
  auto p = static_cast<Index>(std::llround(p_fraction * static_cast<double>(n)));
  if (p < 1 || p > n - 1)
    throw invalid_input("embedding size " + std::to_string(p) + " outside [1, n-1] for n=" + std::to_string(n));
  return p;
}

namespace detail {
inline void require_dimension(const Graph& g, Index p) {
  if (p < 1) throw invalid_input("embedding needs p >= 1");
  if (p > g.n() - 1) throw invalid_input("p exceeds the number of nontrivial directions");
}
inline Embedding to_embedding(EigResult r) { return Embedding{std::move(r.vectors), std::move(r.values)}; }
}  // namespace detail

/// Leading eigenvectors of HAH; each eigenvalue λ satisfies I(x) = (n/a••)·λ.
inline Embedding moran_embedding(const Graph& g, Index p, const EigOptions& opt = {}) {
  detail::require_dimension(g, p);
  auto op = make_operator(g.adjacency());
  return detail::to_embedding(symmetric_eigs(op, p, Which::largest, Subspace::centered, opt));
}

/// Smallest nontrivial solutions of Lx = λHx; c(x) = ((n−1)/a••)·λ.
inline Embedding geary_embedding(const Graph& g, Index p, const EigOptions& opt = {}) {
  detail::require_dimension(g, p);
  const SparseMatrix l = laplacian(g);
  auto op = make_operator(l);
  return detail::to_embedding(symmetric_eigs(op, p, Which::smallest, Subspace::centered, opt));
}

/// Smallest nontrivial solutions of (I−P)ᵀ(I−P)x = λHx; cr(x) = λ.
inline Embedding lpca_embedding(const Graph& g, Index p, const EigOptions& opt = {}) {
  detail::require_dimension(g, p);
  SparseMatrix id(g.n(), g.n());
  id.setIdentity();
  const SparseMatrix r = id - transition_matrix(g);
  SparseMatrix rt = r.transpose();
  SparseMatrix m = rt * r;
  m = 0.5 * (m + SparseMatrix(m.transpose()));
  auto op = make_operator(m);
  return detail::to_embedding(symmetric_eigs(op, p, Which::smallest, Subspace::centered, opt));
}

/// Leading eigenvectors of the (dense) bag-of-paths modularity matrix.
inline Embedding bop_modularity_embedding(const BopContext& ctx, Index p, const EigOptions& opt = {}) {
  if (p < 1 || p > ctx.z.rows() - 1) throw invalid_input("p exceeds the number of nontrivial directions");
  const MatrixXd q = bop_modularity_matrix(ctx);
  auto op = make_operator(q);
  EigOptions dense = opt;
  dense.strategy = EigStrategy::dense;
  return detail::to_embedding(symmetric_eigs(op, p, Which::largest, Subspace::full, dense));
}

inline Embedding bop_modularity_embedding(const Graph& g, double theta, Index p, const EigOptions& opt = {}) {
  if (!(theta > 0.0)) throw invalid_input("theta must be positive");
  return bop_modularity_embedding(bop_fundamental(g, theta), p, opt);
}

inline Embedding compute_embedding(const Graph& g, const EmbeddingSpec& spec, const EigOptions& opt = {}) {
  const Index p = embedding_dimension(g.n(), spec.p_fraction);
  switch (spec.kind) {
    case EmbeddingKind::moran: return moran_embedding(g, p, opt);
    case EmbeddingKind::geary: return geary_embedding(g, p, opt);
    case EmbeddingKind::lpca: return lpca_embedding(g, p, opt);
    case EmbeddingKind::bop_modularity: return bop_modularity_embedding(g, spec.theta, p, opt);
  }
  throw invalid_input("unknown embedding kind");
}

}  // namespace graphssl
