#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "graphssl/dataset.hpp"
#include "graphssl/graph.hpp"
#include "graphssl/log.hpp"

namespace graphssl {

struct SvmOptions {
  double tolerance = 1e-4;  // projected-gradient gap
  int max_epochs = 1000;
  /// Value of the constant feature appended for the bias.
  double bias_feature = 1.0;
  std::uint64_t seed = 0;
};

/// One binary hinge-loss problem: sign(wᵀx + b) > 0 votes for `positive`.
struct SvmPairModel {
  int positive = 0;
  int negative = 1;
  VectorXd w;
  double b = 0.0;
  int epochs = 0;
  bool converged = true;
};

struct LinearSvmModel {
  int num_classes = 0;
  double c = 1.0;
  std::vector<SvmPairModel> pairs;
  /// Set when training saw a single class; every prediction is that class.
  int constant_class = -1;

  double decision(const SvmPairModel& m, const Eigen::Ref<const VectorXd>& x) const { return m.w.dot(x) + m.b; }
};

namespace detail {

/// Dual coordinate descent for min ½‖w‖² + C Σ max(0, 1 − yᵢ wᵀxᵢ), with
/// shrinking. `xt` holds one augmented sample per column; `y` is ±1.
inline VectorXd svm_dual_cd(const MatrixXd& xt, const std::vector<double>& y, double c, const SvmOptions& opt,
                            int& epochs_out, bool& converged_out) {
  const Index d = xt.rows();
  const auto l = static_cast<Index>(y.size());
  VectorXd w = VectorXd::Zero(d);
  std::vector<double> alpha(static_cast<std::size_t>(l), 0.0);
  std::vector<double> qd(static_cast<std::size_t>(l));
  for (Index i = 0; i < l; ++i) qd[i] = xt.col(i).squaredNorm();
  std::vector<Index> index(static_cast<std::size_t>(l));
  for (Index i = 0; i < l; ++i) index[i] = i;

  std::mt19937_64 rng(opt.seed);
  const double inf = std::numeric_limits<double>::infinity();
  double pg_max_old = inf, pg_min_old = -inf;
  Index active = l;
  int epoch = 0;
  converged_out = false;
  while (epoch < opt.max_epochs) {
    for (Index i = 0; i < active; ++i) {
      Index j = i + static_cast<Index>(rng() % static_cast<std::uint64_t>(active - i));
      std::swap(index[i], index[j]);
    }
    double pg_max_new = -inf, pg_min_new = inf;
    for (Index s = 0; s < active; ++s) {
      const Index i = index[s];
      const double yi = y[i];
      const double g = yi * w.dot(xt.col(i)) - 1.0;
      double pg = 0.0;
      if (alpha[i] == 0.0) {
        if (g > pg_max_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g < 0.0) pg = g;
      } else if (alpha[i] == c) {
        if (g < pg_min_old) {
          --active;
          std::swap(index[s], index[active]);
          --s;
          continue;
        }
        if (g > 0.0) pg = g;
      } else {
        pg = g;
      }
      pg_max_new = std::max(pg_max_new, pg);
      pg_min_new = std::min(pg_min_new, pg);
      if (std::fabs(pg) > 1e-12 && qd[i] > 0.0) {
        const double old = alpha[i];
        alpha[i] = std::min(std::max(old - g / qd[i], 0.0), c);
        w.noalias() += ((alpha[i] - old) * yi) * xt.col(i);
      }
    }
    ++epoch;
    if (pg_max_new - pg_min_new <= opt.tolerance) {
      if (active == l) {
        converged_out = true;
        break;
      }
      // re-check the full set before declaring convergence
      active = l;
      pg_max_old = inf;
      pg_min_old = -inf;
      continue;
    }
    pg_max_old = pg_max_new <= 0.0 ? inf : pg_max_new;
    pg_min_old = pg_min_new >= 0.0 ? -inf : pg_min_new;
  }
  epochs_out = epoch;
  return w;
}

}  // namespace detail

/// One-vs-one linear SVMs on rows of `x`. Labels lie in 0..num_classes−1;
/// classes without samples receive no pair model and never win a vote.
inline LinearSvmModel train_linear_svm(const MatrixXd& x, const std::vector<int>& y, int num_classes, double c,
                                       const SvmOptions& opt = {}) {
  if (!(c > 0.0) || !std::isfinite(c)) throw invalid_input("SVM C must be positive and finite");
  if (static_cast<Index>(y.size()) != x.rows()) throw invalid_input("label count differs from sample count");
  if (y.empty()) throw invalid_input("SVM needs at least one sample");
  if (!x.allFinite()) throw invalid_input("non-finite SVM input");
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= num_classes) throw invalid_input("SVM label out of range");
    members[y[i]].push_back(static_cast<Index>(i));
  }
  LinearSvmModel model;
  model.num_classes = num_classes;
  model.c = c;
  std::vector<int> present;
  for (int k = 0; k < num_classes; ++k)
    if (!members[k].empty()) present.push_back(k);
  if (present.size() == 1) {
    warn("SVM training set has a single class; predicting it everywhere");
    model.constant_class = present[0];
    return model;
  }

  const Index d = x.cols();
  for (std::size_t a = 0; a < present.size(); ++a)
    for (std::size_t b = a + 1; b < present.size(); ++b) {
      const auto& pa = members[present[a]];
      const auto& pb = members[present[b]];
      const auto l = static_cast<Index>(pa.size() + pb.size());
      MatrixXd xt(d + 1, l);
      std::vector<double> yy(static_cast<std::size_t>(l));
      Index col = 0;
      for (Index i : pa) {
        xt.col(col).head(d) = x.row(i).transpose();
        xt(d, col) = opt.bias_feature;
        yy[col++] = 1.0;
      }
      for (Index i : pb) {
        xt.col(col).head(d) = x.row(i).transpose();
        xt(d, col) = opt.bias_feature;
        yy[col++] = -1.0;
      }
      SvmPairModel pm;
      pm.positive = present[a];
      pm.negative = present[b];
      SvmOptions sub = opt;
      sub.seed = opt.seed + 0x9E3779B97F4A7C15ULL * (model.pairs.size() + 1);
      VectorXd wb = detail::svm_dual_cd(xt, yy, c, sub, pm.epochs, pm.converged);
      pm.w = wb.head(d);
      pm.b = wb(d) * opt.bias_feature;
      model.pairs.push_back(std::move(pm));
    }
  return model;
}

/// Majority vote over pair models; ties go to the lowest class id. Returns the
/// vote counts as scores.
inline Classification predict_linear_svm(const LinearSvmModel& model, const MatrixXd& x) {
  const Index n = x.rows();
  MatrixXd votes = MatrixXd::Zero(n, model.num_classes);
  if (model.constant_class >= 0) {
    votes.col(model.constant_class).setOnes();
  } else {
    for (const auto& pm : model.pairs) {
      if (pm.w.size() != x.cols()) throw invalid_input("feature dimension differs from the trained model");
      const VectorXd dv = (x * pm.w).array() + pm.b;
      for (Index i = 0; i < n; ++i) votes(i, dv(i) > 0.0 ? pm.positive : pm.negative) += 1.0;
    }
  }
  return Classification{argmax_rows(votes), std::move(votes)};
}

}  // namespace graphssl
