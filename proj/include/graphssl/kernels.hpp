#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "graphssl/bop.hpp"
#include "graphssl/dataset.hpp"
#include "graphssl/graph.hpp"

namespace graphssl {

enum class KernelKind { rctk, linear_features };

struct KernelMatrix {
  KernelKind kind = KernelKind::rctk;
  MatrixXd k;
};

namespace detail {

/// Factorization of D − αA with a residual-checked solve.
class RctkSystem {
 public:
  RctkSystem(const Graph& g, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw invalid_input("alpha must lie in (0, 1]");
    detail::require_positive_degrees(g);
    SparseMatrix d(g.n(), g.n());
    d.reserve(Eigen::VectorXi::Constant(g.n(), 1));
    for (Index i = 0; i < g.n(); ++i) d.insert(i, i) = g.degrees()(i);
    m_ = d - alpha * g.adjacency();
    m_.makeCompressed();
    ldlt_.compute(m_);
    if (ldlt_.info() != Eigen::Success) throw solve_failure("D - alpha*A is not factorizable");
    const VectorXd piv = ldlt_.vectorD();
    const double dmax = piv.cwiseAbs().maxCoeff();
    if (!(piv.minCoeff() > 1e-12 * dmax)) throw solve_failure("D - alpha*A is singular or indefinite");
  }

  MatrixXd solve(const MatrixXd& rhs) const {
    MatrixXd x = ldlt_.solve(rhs);
    const MatrixXd r = m_ * x - rhs;
    for (Index j = 0; j < rhs.cols(); ++j) {
      const double scale = std::max(1.0, x.col(j).norm());
      if (!(r.col(j).norm() <= 1e-10 * scale))
        throw solve_failure("regularized commute-time solve residual too large");
    }
    return x;
  }

 private:
  SparseMatrix m_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

}  // namespace detail

/// Regularized commute-time kernel K = (D − αA)⁻¹, materialized densely.
inline KernelMatrix rctk(const Graph& g, double alpha, Index dense_limit = kDefaultDenseLimit) {
  if (g.n() > dense_limit)
    throw capacity_exceeded("dense kernel for " + std::to_string(g.n()) + " nodes exceeds limit " +
                            std::to_string(dense_limit));
  detail::RctkSystem sys(g, alpha);
  MatrixXd k = sys.solve(MatrixXd::Identity(g.n(), g.n()));
  k = 0.5 * (k + k.transpose()).eval();
  return KernelMatrix{KernelKind::rctk, std::move(k)};
}

/// K = X Xᵀ.
inline KernelMatrix linear_feature_kernel(const MatrixXd& x) {
  MatrixXd k = MatrixXd::Zero(x.rows(), x.rows());
  k.selfadjointView<Eigen::Lower>().rankUpdate(x);
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return KernelMatrix{KernelKind::linear_features, std::move(k)};
}

struct SumOfSimilaritiesOptions {
  /// Divide each class score by the class's labeled count.
  bool class_mass_normalization = false;
};

namespace detail {
inline MatrixXd class_indicators(Index n, const std::vector<std::vector<Index>>& classes) {
  MatrixXd y = MatrixXd::Zero(n, static_cast<Index>(classes.size()));
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (Index v : classes[c]) {
      if (v < 0 || v >= n) throw invalid_input("labeled node out of range");
      y(v, static_cast<Index>(c)) = 1.0;
    }
  return y;
}

inline Classification finish_sum_of_similarities(const MatrixXd& ky, std::span<const Index> targets,
                                                 const std::vector<std::vector<Index>>& classes,
                                                 const SumOfSimilaritiesOptions& opt) {
  MatrixXd scores(static_cast<Index>(targets.size()), ky.cols());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] < 0 || targets[t] >= ky.rows()) throw invalid_input("target node out of range");
    scores.row(static_cast<Index>(t)) = ky.row(targets[t]);
  }
  if (opt.class_mass_normalization)
    for (std::size_t c = 0; c < classes.size(); ++c)
      scores.col(static_cast<Index>(c)) /= static_cast<double>(classes[c].size());
  return Classification{argmax_rows(scores), std::move(scores)};
}
}  // namespace detail

/// score_i(c) = (K yᶜ)_i; argmax with ties to the lowest class.
inline Classification sum_of_similarities_classify(const KernelMatrix& k, const LabeledSet& labeled,
                                                   std::span<const Index> targets,
                                                   const SumOfSimilaritiesOptions& opt = {}) {
  const auto classes = labeled.by_class();
  const MatrixXd y = detail::class_indicators(k.k.rows(), classes);
  return detail::finish_sum_of_similarities(k.k * y, targets, classes, opt);
}

/// Same scores without forming K: solves (D − αA)S = Y, one column per class.
inline Classification rctk_sum_of_similarities_classify(const Graph& g, double alpha, const LabeledSet& labeled,
                                                        std::span<const Index> targets,
                                                        const SumOfSimilaritiesOptions& opt = {}) {
  const auto classes = labeled.by_class();
  detail::RctkSystem sys(g, alpha);
  const MatrixXd ky = sys.solve(detail::class_indicators(g.n(), classes));
  return detail::finish_sum_of_similarities(ky, targets, classes, opt);
}

}  // namespace graphssl
