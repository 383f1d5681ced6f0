#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphssl/dataset.hpp"
#include "graphssl/features.hpp"
#include "graphssl/graph.hpp"
#include "graphssl/kernels.hpp"
#include "graphssl/linear_svm.hpp"
#include "graphssl/log.hpp"

namespace graphssl {

namespace detail {

inline std::vector<int> labels_at(const std::vector<int>& all, std::span<const Index> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(all[r]);
  return out;
}

inline MatrixXd rows_of(const MatrixXd& m, std::span<const Index> rows) {
  MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

inline void check_labeled(const LabeledSet& labeled, Index n) {
  if (labeled.nodes.empty()) throw invalid_input("no labeled node");
  for (Index v : labeled.nodes)
    if (v < 0 || v >= n) throw invalid_input("labeled node out of range");
  for (int y : labeled.labels)
    if (y < 0 || y >= labeled.num_classes) throw invalid_input("labeled class out of range");
}

}  // namespace detail

/// Trains a linear SVM on the labeled rows of an already composed matrix and
/// predicts `targets`.
inline Classification svm_on_matrix(const MatrixXd& composed, const LabeledSet& labeled,
                                    std::span<const Index> targets, double c, const SvmOptions& opt = {}) {
  detail::check_labeled(labeled, composed.rows());
  auto model = train_linear_svm(detail::rows_of(composed, labeled.nodes), labeled.labels, labeled.num_classes, c, opt);
  return predict_linear_svm(model, detail::rows_of(composed, targets));
}

/// SVM over the standardized column concatenation of `blocks`.
inline Classification svm_classify(std::span<const MatrixXd> blocks, const LabeledSet& labeled,
                                   std::span<const Index> targets, double c, const SvmOptions& opt = {},
                                   const ComposeOptions& compose = {}) {
  return svm_on_matrix(compose_features(blocks, labeled.nodes, compose), labeled, targets, c, opt);
}

// ---------------------------------------------------------------- autoSVM

struct AutoSvmOptions {
  int max_iter = 50;
  /// Use normalized vote fractions instead of one-hot predictions in Ŷ.
  bool soft = false;
  /// Update unlabeled nodes one at a time (ascending id) instead of all at once.
  bool sequential = false;
  SvmOptions svm;
};

struct AutoSvmResult {
  /// Predicted class per node (labeled nodes keep their label).
  std::vector<int> node_labels;
  /// Predictions of the first, features-only round.
  std::vector<int> initial_labels;
  /// Nodes whose prediction changed in each round after the first.
  std::vector<std::vector<Index>> changes;
  std::vector<double> training_accuracy;
  int iterations = 0;
  bool converged = false;
  bool cycle_detected = false;

  std::vector<int> at(std::span<const Index> targets) const { return detail::labels_at(node_labels, targets); }
};

/// Autocovariates Ac = P Ŷ.
inline MatrixXd autocovariates(const SparseMatrix& p, const MatrixXd& y_hat) { return p * y_hat; }

/// Iterative SVM on [X, Ac]. Round 0 is an SVM on X alone; every later round
/// recomputes Ac from the current memberships and retrains.
inline AutoSvmResult autosvm_classify(const Graph& g, const MatrixXd& x, const LabeledSet& labeled, double c,
                                      const AutoSvmOptions& opt = {}) {
  const Index n = g.n();
  if (x.rows() != n) throw invalid_input("feature rows differ from node count");
  detail::check_labeled(labeled, n);
  if (opt.max_iter < 0) throw invalid_input("max_iter must be non-negative");
  const int q = labeled.num_classes;

  std::vector<char> is_labeled(static_cast<std::size_t>(n), 0);
  for (Index v : labeled.nodes) is_labeled[v] = 1;
  std::vector<Index> unlabeled;
  for (Index i = 0; i < n; ++i)
    if (!is_labeled[i]) unlabeled.push_back(i);

  const SparseMatrix p = transition_matrix(g);
  AutoSvmResult res;

  auto train_acc = [&](const LinearSvmModel& m, const MatrixXd& composed) {
    auto pred = predict_linear_svm(m, detail::rows_of(composed, labeled.nodes)).labels;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labeled.labels[i];
    return static_cast<double>(hit) / static_cast<double>(pred.size());
  };

  // round 0: features only, composed exactly as for SVM-X
  MatrixXd y_hat = MatrixXd::Zero(n, q);
  std::vector<int> current(static_cast<std::size_t>(n), 0);
  {
    const MatrixXd composed = compose_features(std::span<const MatrixXd>(&x, 1), labeled.nodes);
    auto model = train_linear_svm(detail::rows_of(composed, labeled.nodes), labeled.labels, q, c, opt.svm);
    auto pred = predict_linear_svm(model, detail::rows_of(composed, unlabeled));
    for (std::size_t i = 0; i < unlabeled.size(); ++i) {
      current[unlabeled[i]] = pred.labels[i];
      const double total = pred.scores.row(static_cast<Index>(i)).sum();
      if (opt.soft && total > 0.0)
        y_hat.row(unlabeled[i]) = pred.scores.row(static_cast<Index>(i)) / total;
      else
        y_hat(unlabeled[i], pred.labels[i]) = 1.0;
    }
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      current[labeled.nodes[i]] = labeled.labels[i];
      y_hat(labeled.nodes[i], labeled.labels[i]) = 1.0;
    }
    res.training_accuracy.push_back(train_acc(model, composed));
  }
  res.initial_labels = current;

  std::vector<std::vector<int>> history{current};
  ComposeOptions quiet;
  quiet.warn_on_drop = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const MatrixXd ac = autocovariates(p, y_hat);
    const MatrixXd blocks[2] = {x, ac};
    const MatrixXd composed = compose_features(std::span<const MatrixXd>(blocks, 2), labeled.nodes, quiet);
    auto model = train_linear_svm(detail::rows_of(composed, labeled.nodes), labeled.labels, q, c, opt.svm);
    std::vector<int> next = current;
    MatrixXd next_hat = y_hat;
    if (!opt.sequential) {
      auto pred = predict_linear_svm(model, detail::rows_of(composed, unlabeled));
      for (std::size_t i = 0; i < unlabeled.size(); ++i) {
        next[unlabeled[i]] = pred.labels[i];
        next_hat.row(unlabeled[i]).setZero();
        const double total = pred.scores.row(static_cast<Index>(i)).sum();
        if (opt.soft && total > 0.0)
          next_hat.row(unlabeled[i]) = pred.scores.row(static_cast<Index>(i)) / total;
        else
          next_hat(unlabeled[i], pred.labels[i]) = 1.0;
      }
    } else {
      // Standardization is frozen for the round; only the kept Ac columns move.
      MatrixXd work = composed;
      std::vector<Index> kept_k;
      std::vector<double> mean, sd;
      for (Index k = 0; k < q; ++k) {
        double mu = 0.0, v = 0.0;
        for (Index r : labeled.nodes) mu += ac(r, k);
        mu /= static_cast<double>(labeled.size());
        for (Index r : labeled.nodes) v += (ac(r, k) - mu) * (ac(r, k) - mu);
        const double s = std::sqrt(v / static_cast<double>(labeled.size()));
        if (s > 1e-12 * std::max(1.0, std::fabs(mu))) {
          kept_k.push_back(k);
          mean.push_back(mu);
          sd.push_back(s);
        }
      }
      const Index first = composed.cols() - static_cast<Index>(kept_k.size());
      for (Index u : unlabeled) {
        const VectorXd row = next_hat.transpose() * VectorXd(p.row(u).transpose());
        for (std::size_t j = 0; j < kept_k.size(); ++j)
          work(u, first + static_cast<Index>(j)) = (row(kept_k[j]) - mean[j]) / sd[j];
        auto pred = predict_linear_svm(model, MatrixXd(work.row(u)));
        next[u] = pred.labels[0];
        next_hat.row(u).setZero();
        const double total = pred.scores.row(0).sum();
        if (opt.soft && total > 0.0)
          next_hat.row(u) = pred.scores.row(0) / total;
        else
          next_hat(u, pred.labels[0]) = 1.0;
      }
    }
    res.training_accuracy.push_back(train_acc(model, composed));
    std::vector<Index> changed;
    for (Index u : unlabeled)
      if (next[u] != current[u]) changed.push_back(u);
    res.changes.push_back(std::move(changed));
    res.iterations = it;
    const bool same = res.changes.back().empty();
    // a repeat of any earlier labeling means the iteration has entered a cycle
    std::size_t repeat = history.size();
    if (!same)
      for (std::size_t j = 0; j + 1 < history.size(); ++j)
        if (history[j] == next) {
          repeat = j;
          break;
        }
    history.push_back(next);
    if (same) {
      current = std::move(next);
      y_hat = std::move(next_hat);
      res.converged = true;
      break;
    }
    if (repeat + 1 < history.size()) {
      res.cycle_detected = true;
      // keep the cycle member whose producing model fits the labeled nodes best
      const auto& acc = res.training_accuracy;
      std::size_t best = history.size() - 1;
      for (std::size_t j = repeat + 1; j < history.size(); ++j)
        if (acc[j] > acc[best]) best = j;
      current = history[best];
      break;
    }
    current = std::move(next);
    y_hat = std::move(next_hat);
  }
  if (!res.converged && !res.cycle_detected && opt.max_iter > 0)
    warn("autoSVM stopped after " + std::to_string(res.iterations) + " rounds without converging");
  if (opt.max_iter == 0) res.converged = true;
  res.node_labels = std::move(current);
  return res;
}

// ------------------------------------------------------ double kernel SVM

/// [K_A, K_X] with K_A = (D − αA)⁻¹ and K_X = X Xᵀ; n × 2n.
inline MatrixXd double_kernel_matrix(const Graph& g, const MatrixXd& x, double alpha) {
  if (x.rows() != g.n()) throw invalid_input("feature rows differ from node count");
  const MatrixXd ka = rctk(g, alpha).k;
  MatrixXd out(g.n(), 2 * g.n());
  out.leftCols(g.n()) = ka;
  out.rightCols(g.n()) = linear_feature_kernel(x).k;
  return out;
}

inline Classification double_kernel_svm(const Graph& g, const MatrixXd& x, const LabeledSet& labeled,
                                        std::span<const Index> targets, double c, double alpha,
                                        const SvmOptions& opt = {}) {
  const MatrixXd k = double_kernel_matrix(g, x, alpha);
  // kernel columns of feature-less nodes are constant; dropping them is routine
  return svm_classify(std::span<const MatrixXd>(&k, 1), labeled, targets, c, opt, ComposeOptions{false});
}

// -------------------------------------------------- spatial autoregression

struct SarClassModel {
  double rho = 0.0;
  VectorXd w;  // last entry is the intercept
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
};

struct SarModel {
  std::vector<SarClassModel> classes;
};

struct SarOptions {
  int grid_points = 41;
  double golden_tolerance = 1e-6;
  double ridge = 1e-8;
  /// Skip estimation and use this ρ (0 gives ordinary least squares).
  std::optional<double> fixed_rho;
};

/// Eigenvalues of P = D⁻¹A via the similar symmetric matrix D^{-1/2} A D^{-1/2}.
inline VectorXd transition_eigenvalues(const Graph& g, Index dense_limit = kDefaultDenseLimit) {
  if (g.n() > dense_limit) throw capacity_exceeded("transition spectrum needs a dense matrix beyond the limit");
  detail::require_positive_degrees(g);
  const VectorXd s = g.degrees().array().rsqrt();
  MatrixXd m = MatrixXd(g.adjacency());
  m = s.asDiagonal() * m * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw solve_failure("eigenvalues of P did not converge");
  return es.eigenvalues();
}

namespace detail {

/// Residual-maker for least squares on `x` (with ridge fallback).
class LeastSquares {
 public:
  LeastSquares(const MatrixXd& x, double ridge) : x_(x) {
    MatrixXd g = x.transpose() * x;
    const bool thin = x.rows() < x.cols();
    ldlt_.compute(g);
    const VectorXd d = ldlt_.vectorD();
    const double dmax = std::max(1.0, d.cwiseAbs().maxCoeff());
    if (thin || ldlt_.info() != Eigen::Success || !(d.minCoeff() > 1e-12 * dmax)) {
      const double scale = std::max(1.0, g.diagonal().mean());
      g.diagonal().array() += ridge * scale;
      ldlt_.compute(g);
    }
  }
  VectorXd coefficients(const VectorXd& y) const { return ldlt_.solve(x_.transpose() * y); }

 private:
  MatrixXd x_;
  Eigen::LDLT<MatrixXd> ldlt_;
};

inline double sar_concentrated_ll(double rho, const VectorXd& e0, const VectorXd& e1, const VectorXd& eig,
                                  double n_total) {
  const double nl = static_cast<double>(e0.size());
  const double s2 = std::max((e0 - rho * e1).squaredNorm() / nl, 1e-300);
  double logdet = 0.0;
  for (Index i = 0; i < eig.size(); ++i) logdet += std::log(std::fabs(1.0 - rho * eig(i)));
  return -0.5 * nl * std::log(s2) + nl / n_total * logdet;
}

}  // namespace detail

namespace detail {

struct SarDesign {
  MatrixXd xl;
  LeastSquares ls;
  double lo, hi;
  SarDesign(const MatrixXd& x, std::span<const Index> rows, const VectorXd& eig, double ridge)
      : xl(design(x, rows)), ls(xl, ridge) {
    const double lmin = eig.minCoeff();
    lo = std::max(lmin < 0.0 ? 1.0 / lmin : -1.0, -1.0) + 1e-6;
    hi = 1.0 - 1e-6;
  }
  static MatrixXd design(const MatrixXd& x, std::span<const Index> rows) {
    MatrixXd xl(static_cast<Index>(rows.size()), x.cols() + 1);
    xl.leftCols(x.cols()) = rows_of(x, rows);
    xl.col(x.cols()).setOnes();
    return xl;
  }
};

inline SarClassModel sar_fit_one(const SarDesign& des, const SparseMatrix& p, const VectorXd& eig,
                                 std::span<const Index> rows, const VectorXd& y, const SarOptions& opt) {
  const auto nl = static_cast<Index>(rows.size());
  const VectorXd lag_all = p * y;
  VectorXd yl(nl), lag(nl);
  for (Index i = 0; i < nl; ++i) {
    yl(i) = y(rows[i]);
    lag(i) = lag_all(rows[i]);
  }
  const VectorXd b0 = des.ls.coefficients(yl), b1 = des.ls.coefficients(lag);
  const VectorXd e0 = yl - des.xl * b0, e1 = lag - des.xl * b1;
  auto ll = [&](double r) { return sar_concentrated_ll(r, e0, e1, eig, static_cast<double>(y.size())); };
  const double lo = des.lo, hi = des.hi;

  double rho = 0.0;
  if (opt.fixed_rho) {
    rho = *opt.fixed_rho;
  } else {
    const int k = std::max(opt.grid_points, 3);
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      const double r = lo + (hi - lo) * i / (k - 1);
      const double v = ll(r);
      if (v > best_ll) {
        best_ll = v;
        best = i;
      }
    }
    double a = lo + (hi - lo) * std::max(best - 1, 0) / (k - 1);
    double b = lo + (hi - lo) * std::min(best + 1, k - 1) / (k - 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = ll(x1), f2 = ll(x2);
    while (b - a > opt.golden_tolerance) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = ll(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = ll(x2);
      }
    }
    rho = 0.5 * (a + b);
    if (ll(rho) < best_ll) rho = lo + (hi - lo) * best / (k - 1);
    if (rho - lo < 1e-5 || hi - rho < 1e-5) warn("SAR rho clamped at the stability boundary");
  }
  SarClassModel cm;
  cm.rho = rho;
  cm.w = b0 - rho * b1;
  cm.sigma2 = std::max((e0 - rho * e1).squaredNorm() / static_cast<double>(nl), 1e-300);
  cm.log_likelihood = ll(rho);
  return cm;
}

}  // namespace detail

/// Fits y = ρPy + Xw + ε for one real-valued response observed on `rows`;
/// entries of `y` outside `rows` only enter through the spatial lag.
inline SarClassModel sar_fit_response(const Graph& g, const MatrixXd& x, std::span<const Index> rows,
                                      const VectorXd& y, const SarOptions& opt = {},
                                      const VectorXd* p_eigenvalues = nullptr) {
  const Index n = g.n();
  if (x.rows() != n || y.size() != n) throw invalid_input("feature rows or response length differ from node count");
  if (rows.empty()) throw invalid_input("SAR needs at least one observed row");
  for (Index r : rows)
    if (r < 0 || r >= n) throw invalid_input("observed row out of range");
  const VectorXd eig = p_eigenvalues ? *p_eigenvalues : transition_eigenvalues(g);
  if (eig.size() != n) throw invalid_input("eigenvalue count differs from node count");
  const detail::SarDesign des(x, rows, eig, opt.ridge);
  return detail::sar_fit_one(des, transition_matrix(g), eig, rows, y, opt);
}

/// Per-class y = ρPy + Xw + ε fitted by concentrated maximum likelihood on the
/// labeled rows. Unlabeled entries of y inside the spatial lag are filled with
/// the labeled class prior. `x` should already be standardized; an intercept is
/// appended here. `p_eigenvalues` may be passed to avoid recomputation.
inline SarModel sar_fit(const Graph& g, const MatrixXd& x, const LabeledSet& labeled, const SarOptions& opt = {},
                        const VectorXd* p_eigenvalues = nullptr) {
  const Index n = g.n();
  if (x.rows() != n) throw invalid_input("feature rows differ from node count");
  detail::check_labeled(labeled, n);
  const VectorXd eig = p_eigenvalues ? *p_eigenvalues : transition_eigenvalues(g);
  if (eig.size() != n) throw invalid_input("eigenvalue count differs from node count");
  const SparseMatrix p = transition_matrix(g);
  const detail::SarDesign des(x, labeled.nodes, eig, opt.ridge);

  SarModel model;
  for (int c = 0; c < labeled.num_classes; ++c) {
    double prior = 0.0;
    for (std::size_t i = 0; i < labeled.size(); ++i) prior += labeled.labels[i] == c;
    prior /= static_cast<double>(labeled.size());
    VectorXd y = VectorXd::Constant(n, prior);
    for (std::size_t i = 0; i < labeled.size(); ++i) y(labeled.nodes[i]) = labeled.labels[i] == c ? 1.0 : 0.0;
    model.classes.push_back(detail::sar_fit_one(des, p, eig, labeled.nodes, y, opt));
  }
  return model;
}

/// ŷᶜ = (I − ρP)⁻¹ X wᶜ over all nodes, solved as (D − ρA)s = D X wᶜ. Scores
/// rows follow `targets`.
inline Classification sar_classify(const SarModel& model, const Graph& g, const MatrixXd& x,
                                   std::span<const Index> targets) {
  const Index n = g.n();
  detail::require_positive_degrees(g);
  const auto q = static_cast<Index>(model.classes.size());
  MatrixXd xa(n, x.cols() + 1);
  xa.leftCols(x.cols()) = x;
  xa.col(x.cols()).setOnes();
  MatrixXd scores(static_cast<Index>(targets.size()), q);
  SparseMatrix d(n, n);
  d.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Index i = 0; i < n; ++i) d.insert(i, i) = g.degrees()(i);
  for (Index c = 0; c < q; ++c) {
    const auto& cm = model.classes[c];
    if (cm.w.size() != xa.cols()) throw invalid_input("SAR model dimension differs from features");
    const VectorXd rhs = g.degrees().asDiagonal() * (xa * cm.w);
    VectorXd s;
    if (cm.rho == 0.0) {
      s = xa * cm.w;
    } else {
      SparseMatrix m = d - cm.rho * g.adjacency();
      Eigen::SimplicialLDLT<SparseMatrix> solver(m);
      if (solver.info() != Eigen::Success) throw solve_failure("SAR prediction system is singular");
      s = solver.solve(rhs);
    }
    for (std::size_t t = 0; t < targets.size(); ++t) scores(static_cast<Index>(t), c) = s(targets[t]);
  }
  return Classification{argmax_rows(scores), std::move(scores)};
}

}  // namespace graphssl
