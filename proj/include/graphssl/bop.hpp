#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "graphssl/dataset.hpp"
#include "graphssl/graph.hpp"

namespace graphssl {

/// Default cap on the node count for the dense fundamental matrix.
inline constexpr Index kDefaultDenseLimit = 5000;

struct BopContext {
  double theta = 0.0;
  SparseMatrix w;  // p_ij · exp(−θ c_ij)
  MatrixXd z;      // (I − W)⁻¹
};

/// Bag-of-paths fundamental matrix Z = (I − W)⁻¹ with W = P ∘ exp(−θC).
inline BopContext bop_fundamental(const Graph& g, double theta, Index dense_limit = kDefaultDenseLimit) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw invalid_input("theta must be positive and finite");
  const Index n = g.n();
  if (n > dense_limit)
    throw capacity_exceeded("bag-of-paths needs a dense " + std::to_string(n) + "x" + std::to_string(n) +
                            " matrix; limit is " + std::to_string(dense_limit));
  BopContext ctx;
  ctx.theta = theta;
  ctx.w = transition_matrix(g);
  const SparseMatrix& c = g.costs();
  for (Index k = 0; k < ctx.w.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ctx.w, k); it; ++it)
      it.valueRef() *= std::exp(-theta * c.coeff(it.row(), it.col()));

  MatrixXd m = -MatrixXd(ctx.w);
  m.diagonal().array() += 1.0;
  Eigen::PartialPivLU<MatrixXd> lu(m);
  ctx.z = lu.solve(MatrixXd::Identity(n, n));

  // Column residuals, relative to the size of each solution column.
  const MatrixXd r = m * ctx.z - MatrixXd::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    const double scale = std::max(1.0, ctx.z.col(j).norm());
    if (!(r.col(j).norm() <= 1e-10 * scale))
      throw solve_failure("bag-of-paths solve residual too large in column " + std::to_string(j));
  }
  return ctx;
}

/// Q = Z − (Ze)(eᵀZ)/(eᵀZe), symmetrized.
inline MatrixXd bop_modularity_matrix(const BopContext& ctx) {
  const VectorXd row_sums = ctx.z.rowwise().sum();
  const Eigen::RowVectorXd col_sums = ctx.z.colwise().sum();
  const double total = row_sums.sum();
  if (!(total > 0.0)) throw invalid_input("fundamental matrix sums to zero");
  MatrixXd q = ctx.z - row_sums * col_sums / total;
  return 0.5 * (q + q.transpose());
}

struct GroupBetweennessOptions {
  /// When a class has a single labeled node, the only available pair is (j, j);
  /// count it instead of leaving the class with no score.
  bool self_pairs_for_singletons = true;
};

/// gbet_i(c) = 1/(z_ii N_c) Σ_{j≠k ∈ L_c∖{i}} z_ji z_ik / z_jk; argmax over classes.
/// Scores rows follow `targets`.
inline Classification bop_group_betweenness_classify(const BopContext& ctx, const LabeledSet& labeled,
                                                     std::span<const Index> targets,
                                                     const GroupBetweennessOptions& opt = {}) {
  const auto classes = labeled.by_class();
  const Index n = ctx.z.rows();
  std::vector<char> is_labeled(static_cast<std::size_t>(n), 0);
  for (Index v : labeled.nodes) {
    if (v < 0 || v >= n) throw invalid_input("labeled node out of range");
    is_labeled[v] = 1;
  }
  for (Index t : targets) {
    if (t < 0 || t >= n) throw invalid_input("target node out of range");
    if (is_labeled[t]) throw invalid_input("target " + std::to_string(t) + " is also labeled");
  }
  const auto q = static_cast<Index>(classes.size());
  const auto nt = static_cast<Index>(targets.size());
  MatrixXd scores = MatrixXd::Zero(nt, q);

  VectorXd zii(nt);
  for (Index t = 0; t < nt; ++t) zii(t) = ctx.z(targets[t], targets[t]);

  for (Index c = 0; c < q; ++c) {
    const auto& members = classes[c];
    const auto lc = static_cast<Index>(members.size());
    const bool self = lc == 1 && opt.self_pairs_for_singletons;
    // R_jk = 1/z_jk over L_c × L_c, diagonal dropped unless singleton.
    MatrixXd inv(lc, lc);
    for (Index a = 0; a < lc; ++a)
      for (Index b = 0; b < lc; ++b) inv(a, b) = (a == b && !self) ? 0.0 : 1.0 / ctx.z(members[a], members[b]);
    const double pairs = self ? 1.0 : static_cast<double>(lc * (lc - 1));
    // from(t, a) = z_{j_a, i_t}, to(t, b) = z_{i_t, k_b}
    MatrixXd from(nt, lc), to(nt, lc);
    for (Index t = 0; t < nt; ++t)
      for (Index a = 0; a < lc; ++a) {
        from(t, a) = ctx.z(members[a], targets[t]);
        to(t, a) = ctx.z(targets[t], members[a]);
      }
    const VectorXd s = ((from * inv).array() * to.array()).rowwise().sum();
    if (pairs > 0.0) scores.col(c) = s.array() / (zii.array() * pairs);
  }
  return Classification{argmax_rows(scores), std::move(scores)};
}

}  // namespace graphssl
