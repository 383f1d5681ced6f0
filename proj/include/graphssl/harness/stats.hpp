#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "graphssl/error.hpp"

namespace graphssl::harness {

/// Ranks within one case: 1 = highest value, ties share the average rank.
inline std::vector<double> rank_descending(const std::vector<double>& values) {
  const std::size_t k = values.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> rank(k);
  for (std::size_t i = 0; i < k;) {
    std::size_t j = i;
    while (j + 1 < k && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
    i = j + 1;
  }
  return rank;
}

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int degrees_of_freedom = 0;
  std::vector<double> mean_ranks;  // per method
  int methods = 0;
  int cases = 0;
};

/// `table[m][c]` is the score (higher is better) of method m on case c.
inline FriedmanResult friedman_test(const std::vector<std::vector<double>>& table) {
  const auto k = static_cast<int>(table.size());
  if (k < 3) throw invalid_input("Friedman test needs at least 3 methods");
  const auto n = static_cast<int>(table[0].size());
  if (n < 2) throw invalid_input("Friedman test needs at least 2 cases");
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != n) throw invalid_input("ragged accuracy table");
    for (double v : row)
      if (!std::isfinite(v)) throw invalid_input("non-finite accuracy in Friedman table");
  }
  FriedmanResult r;
  r.methods = k;
  r.cases = n;
  r.degrees_of_freedom = k - 1;
  r.mean_ranks.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> column(static_cast<std::size_t>(k));
  for (int c = 0; c < n; ++c) {
    for (int m = 0; m < k; ++m) column[m] = table[m][c];
    const auto rk = rank_descending(column);
    for (int m = 0; m < k; ++m) r.mean_ranks[m] += rk[m];
  }
  double sum_sq = 0.0;
  for (auto& v : r.mean_ranks) {
    v /= n;
    sum_sq += v * v;
  }
  const double kk = k;
  r.statistic = 12.0 * n / (kk * (kk + 1.0)) * (sum_sq - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
  if (r.statistic < 0.0) r.statistic = 0.0;  // rounding when all ranks tie
  boost::math::chi_squared dist(kk - 1.0);
  r.p_value = r.statistic == 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

/// Two-tailed Nemenyi q at α = 0.05 for k = 2..20 (studentized range at
/// infinite degrees of freedom divided by √2).
inline constexpr std::array<double, 19> kNemenyiQ05 = {
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
};

inline double nemenyi_q(int k, double alpha = 0.05) {
  if (alpha != 0.05) throw invalid_input("Nemenyi table only covers alpha = 0.05");
  if (k < 2 || k > 20) throw invalid_input("Nemenyi table covers 2..20 methods, got " + std::to_string(k));
  return kNemenyiQ05[static_cast<std::size_t>(k - 2)];
}

/// CD = q · √(k(k+1) / (6N)).
inline double nemenyi_cd(int k, int n, double alpha = 0.05) {
  if (n < 1) throw invalid_input("Nemenyi needs at least one case");
  return nemenyi_q(k, alpha) * std::sqrt(static_cast<double>(k) * (k + 1) / (6.0 * n));
}

/// Methods a and b differ iff their mean-rank gap exceeds the CD.
inline std::vector<std::vector<bool>> nemenyi_significance(const std::vector<double>& mean_ranks, double cd) {
  const std::size_t k = mean_ranks.size();
  std::vector<std::vector<bool>> sig(k, std::vector<bool>(k, false));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) sig[a][b] = std::fabs(mean_ranks[a] - mean_ranks[b]) > cd;
  return sig;
}

}  // namespace graphssl::harness
