#pragma once

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphssl/harness/cv.hpp"
#include "graphssl/models.hpp"

namespace graphssl::harness {

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                       std::span<const Index> nodes) {
  if (nodes.empty()) throw invalid_input("accuracy over an empty node set");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) hit += predicted[i] == truth[nodes[i]];
  return static_cast<double>(hit) / static_cast<double>(nodes.size());
}

struct GridResult {
  ModelParams best;
  double inner_accuracy = 0.0;
  int evaluated = 0;
  /// Grid points skipped because the method raised an error, with the message.
  std::vector<std::pair<ModelParams, std::string>> failures;
};

/// Exhaustive search; the first grid point with the highest mean inner
/// validation accuracy wins. Only `fold.labeled` nodes are ever labeled or scored.
inline GridResult grid_search(MethodId m, const std::vector<ModelParams>& grid, const ModelContext& ctx,
                              const std::vector<int>& truth, const ExternalFold& fold) {
  if (grid.empty()) throw invalid_input("empty parameter grid");
  GridResult r;
  if (grid.size() == 1) {
    r.best = grid.front();
    r.evaluated = 0;
    return r;
  }
  std::optional<double> best;
  for (const auto& prm : grid) {
    try {
      double sum = 0.0;
      int used = 0;
      for (const auto& validation : fold.inner) {
        if (validation.empty()) continue;
        std::vector<Index> train;
        std::set_difference(fold.labeled.begin(), fold.labeled.end(), validation.begin(), validation.end(),
                            std::back_inserter(train));
        if (train.empty()) continue;
        LabeledSet ls;
        ls.nodes = train;
        ls.num_classes = ctx.num_classes;
        for (Index v : train) ls.labels.push_back(truth[v]);
        const auto pred = run_method(m, prm, ctx, ls, validation);
        sum += accuracy(pred, truth, validation);
        ++used;
      }
      if (used == 0) throw invalid_input("no usable inner fold");
      ++r.evaluated;
      const double score = sum / used;
      if (!best || score > *best) {
        best = score;
        r.best = prm;
      }
    } catch (const error& e) {
      r.failures.emplace_back(prm, e.what());
    }
  }
  if (!best) throw solve_failure("every grid point failed for " + std::string(method_name(m)) +
                                 (r.failures.empty() ? "" : ": " + r.failures.front().second));
  r.inner_accuracy = *best;
  return r;
}

/// Most frequent value; ties go to the smallest.
inline std::optional<double> mode_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  std::map<double, int> count;
  for (double v : values) ++count[v];
  auto best = count.begin();
  for (auto it = count.begin(); it != count.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

}  // namespace graphssl::harness
