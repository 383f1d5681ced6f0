#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "graphssl/dataset.hpp"
#include "graphssl/graph.hpp"

namespace graphssl {

namespace detail {

/// Σ(x_i − x̄)², rejecting vectors that are constant to working precision.
inline double centered_sum_of_squares(const VectorXd& x) {
  const double mean = x.mean();
  const double ss = (x.array() - mean).square().sum();
  const double scale = x.squaredNorm();
  if (!(ss > 1e-24 * std::max(1.0, scale)))
    throw degenerate_variance("autocorrelation index of a constant vector is undefined");
  return ss;
}

inline void require_size(const Graph& g, const VectorXd& x) {
  if (x.size() != g.n()) throw invalid_input("vector length differs from node count");
  if (g.volume() <= 0.0) throw invalid_input("graph has no edges");
}

}  // namespace detail

/// Moran's I = (n/a••) Σ a_ij (x_i − x̄)(x_j − x̄) / Σ(x_i − x̄)².
inline double moran_index(const Graph& g, const VectorXd& x) {
  detail::require_size(g, x);
  const double ss = detail::centered_sum_of_squares(x);
  const double mean = x.mean();
  double num = 0.0;
  const auto& a = g.adjacency();
  for (Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      num += it.value() * (x(it.row()) - mean) * (x(it.col()) - mean);
  return static_cast<double>(g.n()) / g.volume() * num / ss;
}

/// Geary's c = (n−1)/(2a••) Σ a_ij (x_i − x_j)² / Σ(x_i − x̄)².
inline double geary_index(const Graph& g, const VectorXd& x) {
  detail::require_size(g, x);
  const double ss = detail::centered_sum_of_squares(x);
  double num = 0.0;
  const auto& a = g.adjacency();
  for (Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const double d = x(it.row()) - x(it.col());
      num += it.value() * d * d;
    }
  return static_cast<double>(g.n() - 1) / (2.0 * g.volume()) * num / ss;
}

/// Contiguity ratio Σ(x_i − m_i)² / Σ(x_i − x̄)², m_i the P-weighted neighbour mean.
inline double contiguity_ratio(const Graph& g, const VectorXd& x) {
  detail::require_size(g, x);
  const double ss = detail::centered_sum_of_squares(x);
  const VectorXd m = transition_matrix(g) * x;
  return (x - m).squaredNorm() / ss;
}

/// The same three indexes through their quadratic-form expressions. Used as an
/// independent route to cross-check the summations above.
namespace matrix_form {

inline VectorXd center(const VectorXd& x) { return x.array() - x.mean(); }

inline double moran_index(const Graph& g, const VectorXd& x) {
  detail::require_size(g, x);
  detail::centered_sum_of_squares(x);
  const VectorXd hx = center(x);
  const VectorXd hahx = center(g.adjacency() * hx);
  return static_cast<double>(g.n()) / g.volume() * x.dot(hahx) / x.dot(hx);
}

/// Uses (n−1)/a•• · xᵀLx / xᵀHx, the form consistent with the scalar definition.
inline double geary_index(const Graph& g, const VectorXd& x) {
  detail::require_size(g, x);
  detail::centered_sum_of_squares(x);
  const VectorXd hx = center(x);
  return static_cast<double>(g.n() - 1) / g.volume() * x.dot(laplacian(g) * x) / x.dot(hx);
}

inline double contiguity_ratio(const Graph& g, const VectorXd& x) {
  detail::require_size(g, x);
  detail::centered_sum_of_squares(x);
  const VectorXd r = x - transition_matrix(g) * x;
  return r.squaredNorm() / x.dot(center(x));
}

}  // namespace matrix_form

struct AutocorrReport {
  std::vector<double> moran;  // per class
  std::vector<double> geary;
  std::vector<double> contiguity;
  double mean_moran = 0.0;
  double mean_geary = 0.0;
  double mean_contiguity = 0.0;
};

/// Indexes of every class-indicator vector yᶜ and their means over classes.
inline AutocorrReport class_autocorrelation_report(const DatasetBundle& b) {
  const int q = b.num_classes();
  if (q < 2) throw invalid_input("autocorrelation report needs at least two classes");
  AutocorrReport r;
  for (int c = 0; c < q; ++c) {
    VectorXd y = VectorXd::Zero(b.n());
    Index members = 0;
    for (Index i = 0; i < b.n(); ++i)
      if (b.labels[i] == c) {
        y(i) = 1.0;
        ++members;
      }
    if (members == 0) throw invalid_input("class " + std::to_string(c) + " has no member");
    r.moran.push_back(moran_index(b.graph, y));
    r.geary.push_back(geary_index(b.graph, y));
    r.contiguity.push_back(contiguity_ratio(b.graph, y));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  r.mean_moran = mean(r.moran);
  r.mean_geary = mean(r.geary);
  r.mean_contiguity = mean(r.contiguity);
  return r;
}

}  // namespace graphssl
