#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "graphssl/graph.hpp"
#include "graphssl/log.hpp"

namespace graphssl {

struct ComposeOptions {
  /// Report dropped constant columns through `warn`.
  bool warn_on_drop = true;
};

/// Column concatenation of `parts`, each column standardized with the mean and
/// population std of the rows listed in `reference_rows` (typically the labeled
/// nodes). Columns constant on those rows are dropped.
inline MatrixXd compose_features(std::span<const MatrixXd> parts, std::span<const Index> reference_rows,
                                 const ComposeOptions& opt = {}) {
  if (parts.empty()) throw invalid_input("compose_features needs at least one block");
  const Index n = parts[0].rows();
  Index width = 0;
  for (const auto& p : parts) {
    if (p.rows() != n) throw invalid_input("feature blocks have different row counts");
    width += p.cols();
  }
  if (reference_rows.empty()) throw invalid_input("standardization needs at least one reference row");
  for (Index r : reference_rows)
    if (r < 0 || r >= n) throw invalid_input("reference row out of range");

  const double m = static_cast<double>(reference_rows.size());
  MatrixXd out(n, width);
  Index kept = 0;
  Index dropped = 0;
  for (const auto& p : parts)
    for (Index j = 0; j < p.cols(); ++j) {
      double mean = 0.0;
      for (Index r : reference_rows) mean += p(r, j);
      mean /= m;
      double var = 0.0;
      for (Index r : reference_rows) var += (p(r, j) - mean) * (p(r, j) - mean);
      const double sd = std::sqrt(var / m);
      if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
        ++dropped;
        continue;
      }
      out.col(kept++) = (p.col(j).array() - mean) / sd;
    }
  if (dropped > 0 && opt.warn_on_drop)
    warn("dropped " + std::to_string(dropped) + " constant feature column(s) of " + std::to_string(width));
  out.conservativeResize(n, kept);
  return out;
}

inline MatrixXd compose_features(std::initializer_list<MatrixXd> parts, std::span<const Index> reference_rows,
                                 const ComposeOptions& opt = {}) {
  std::vector<MatrixXd> v(parts);
  return compose_features(std::span<const MatrixXd>(v), reference_rows, opt);
}

}  // namespace graphssl
