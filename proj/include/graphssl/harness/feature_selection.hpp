#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "graphssl/dataset.hpp"
#include "graphssl/log.hpp"

namespace graphssl::harness {

struct Chi2Ranking {
  /// Feature indices, most associated first.
  std::vector<Index> order;
  /// Statistic per feature (indexed by feature, not by rank).
  std::vector<double> statistic;
};

/// Pearson chi-square statistic between one binarized feature and the class.
/// Features taking only the values {0, v} split on nonzero; anything else
/// splits at the median (above-median vs the rest).
inline double chi2_statistic(const Eigen::Ref<const VectorXd>& f, const std::vector<int>& labels, int q) {
  const Index n = f.size();
  std::vector<double> nonzero;
  for (Index i = 0; i < n; ++i)
    if (f(i) != 0.0) nonzero.push_back(f(i));
  bool two_valued = true;
  for (double v : nonzero)
    if (v != nonzero.front()) {
      two_valued = false;
      break;
    }
  double cut = 0.0;
  bool by_nonzero = two_valued;
  if (!two_valued) {
    std::vector<double> sorted(f.data(), f.data() + n);
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    cut = sorted[n / 2];
    if (n % 2 == 0) {
      const double lower = *std::max_element(sorted.begin(), sorted.begin() + n / 2);
      cut = 0.5 * (cut + lower);
    }
  }
  std::vector<double> table(static_cast<std::size_t>(2 * q), 0.0);
  for (Index i = 0; i < n; ++i) {
    const int bin = by_nonzero ? (f(i) != 0.0) : (f(i) > cut);
    table[bin * q + labels[i]] += 1.0;
  }
  double stat = 0.0;
  const double total = static_cast<double>(n);
  for (int b = 0; b < 2; ++b) {
    double row = 0.0;
    for (int c = 0; c < q; ++c) row += table[b * q + c];
    if (row == 0.0) return 0.0;
    for (int c = 0; c < q; ++c) {
      double col = table[c] + table[q + c];
      if (col == 0.0) continue;
      const double expected = row * col / total;
      const double d = table[b * q + c] - expected;
      stat += d * d / expected;
    }
  }
  return stat;
}

/// Features ordered by decreasing chi-square statistic, ties by index.
inline Chi2Ranking chi2_rank(const MatrixXd& features, const std::vector<int>& labels, int num_classes) {
  if (static_cast<Index>(labels.size()) != features.rows()) throw invalid_input("label count differs from rows");
  Chi2Ranking r;
  r.statistic.resize(static_cast<std::size_t>(features.cols()));
  for (Index j = 0; j < features.cols(); ++j) r.statistic[j] = chi2_statistic(features.col(j), labels, num_classes);
  r.order.resize(r.statistic.size());
  std::iota(r.order.begin(), r.order.end(), Index{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](Index a, Index b) { return r.statistic[a] > r.statistic[b]; });
  return r;
}

inline const std::vector<int>& default_feature_set_sizes() {
  static const std::vector<int> sizes = {5, 10, 25, 50, 100};
  return sizes;
}

struct FeatureSet {
  /// Requested size, used as the label ("5F", ...).
  int size = 0;
  std::vector<Index> columns;
  MatrixXd features;
};

inline std::string feature_set_label(int size) { return std::to_string(size) + "F"; }

/// Nested top-k feature subsets. Sizes above the feature count are dropped
/// with a warning.
inline std::vector<FeatureSet> build_feature_sets(const DatasetBundle& b,
                                                  const std::vector<int>& sizes = default_feature_set_sizes()) {
  if (b.features.cols() == 0) throw invalid_input("dataset has no features");
  const auto rank = chi2_rank(b.features, b.labels, b.num_classes());
  std::vector<int> sorted = sizes;
  std::sort(sorted.begin(), sorted.end());
  std::vector<FeatureSet> out;
  for (int k : sorted) {
    if (k <= 0) throw invalid_input("feature set sizes must be positive");
    if (k > b.features.cols()) {
      warn("dataset " + b.name + " has " + std::to_string(b.features.cols()) + " features; skipping " +
           feature_set_label(k));
      continue;
    }
    FeatureSet fs;
    fs.size = k;
    fs.columns.assign(rank.order.begin(), rank.order.begin() + k);
    fs.features.resize(b.n(), k);
    for (int j = 0; j < k; ++j) fs.features.col(j) = b.features.col(fs.columns[j]);
    out.push_back(std::move(fs));
  }
  if (out.empty()) throw invalid_input("no feature set fits dataset " + b.name);
  return out;
}

}  // namespace graphssl::harness
