#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "graphssl/graph.hpp"
#include "graphssl/log.hpp"

namespace graphssl::harness {

struct CvParams {
  int runs = 5;
  int external_folds = 5;
  int inner_folds = 5;
  bool stratified = true;
  std::uint64_t seed = 0;
  int max_redraws = 100;
};

/// One labeled/test split with its inner tuning folds.
struct ExternalFold {
  std::vector<Index> labeled;  // ascending
  std::vector<Index> test;     // ascending
  /// Inner validation folds, each a subset of `labeled` (ascending).
  std::vector<std::vector<Index>> inner;
};

struct CvPlan {
  CvParams params;
  /// runs × external_folds
  std::vector<std::vector<ExternalFold>> folds;
};

namespace detail {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

template <class T>
inline void fisher_yates(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

/// Fold id per item. Stratified: each class is shuffled and dealt round-robin,
/// continuing the deal across classes so fold sizes differ by at most one.
inline std::vector<int> assign_folds(const std::vector<Index>& items, const std::vector<int>& labels, int k,
                                     bool stratified, std::mt19937_64& rng) {
  std::vector<int> fold(items.size(), 0);
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (!stratified) {
    fisher_yates(order, rng);
    for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = static_cast<int>(i % k);
    return fold;
  }
  int q = 0;
  for (Index v : items) q = std::max(q, labels[v] + 1);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(q));
  for (std::size_t i = 0; i < items.size(); ++i) by_class[labels[items[i]]].push_back(i);
  std::size_t deal = 0;
  for (auto& members : by_class) {
    fisher_yates(members, rng);
    for (std::size_t i : members) fold[i] = static_cast<int>(deal++ % k);
  }
  return fold;
}

}  // namespace detail

/// Random external folds per run; fold f of a run is the labeled set of split
/// f and the remaining nodes are its test set.
inline CvPlan make_cv_plan(Index n, const std::vector<int>& labels, const CvParams& p) {
  if (n < 25) throw invalid_input("cross-validation needs at least 25 nodes");
  if (static_cast<Index>(labels.size()) != n) throw invalid_input("label count differs from node count");
  if (p.runs < 1 || p.external_folds < 2 || p.inner_folds < 2) throw invalid_input("invalid fold counts");
  int q = 0;
  for (int y : labels) q = std::max(q, y + 1);
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[i] = i;

  CvPlan plan;
  plan.params = p;
  for (int run = 0; run < p.runs; ++run) {
    auto rng = detail::stream(p.seed, static_cast<std::uint64_t>(run), 0, 1);
    std::vector<int> fold;
    bool complete = false;
    for (int attempt = 0; attempt < std::max(1, p.max_redraws) && !complete; ++attempt) {
      fold = detail::assign_folds(all, labels, p.external_folds, p.stratified, rng);
      std::vector<std::vector<char>> seen(static_cast<std::size_t>(p.external_folds),
                                          std::vector<char>(static_cast<std::size_t>(q), 0));
      for (Index i = 0; i < n; ++i) seen[fold[i]][labels[i]] = 1;
      complete = std::all_of(seen.begin(), seen.end(),
                             [](const auto& s) { return std::all_of(s.begin(), s.end(), [](char c) { return c; }); });
    }
    if (!complete) warn("run " + std::to_string(run) + ": some labeled fold misses a class");

    std::vector<ExternalFold> splits(static_cast<std::size_t>(p.external_folds));
    for (Index i = 0; i < n; ++i)
      for (int f = 0; f < p.external_folds; ++f) (fold[i] == f ? splits[f].labeled : splits[f].test).push_back(i);
    for (int f = 0; f < p.external_folds; ++f) {
      auto& s = splits[f];
      auto inner_rng = detail::stream(p.seed, static_cast<std::uint64_t>(run), static_cast<std::uint64_t>(f), 2);
      const auto inner = detail::assign_folds(s.labeled, labels, p.inner_folds, p.stratified, inner_rng);
      s.inner.assign(static_cast<std::size_t>(p.inner_folds), {});
      for (std::size_t i = 0; i < s.labeled.size(); ++i) s.inner[inner[i]].push_back(s.labeled[i]);
    }
    plan.folds.push_back(std::move(splits));
  }
  return plan;
}

}  // namespace graphssl::harness
