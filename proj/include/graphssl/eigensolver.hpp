#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "graphssl/error.hpp"
#include "graphssl/graph.hpp"

namespace graphssl {

enum class Which { largest, smallest };

/// `centered` restricts the problem to the complement of the constant vector,
/// i.e. solves HMHx = λHx with H = I − E/n and returns centered vectors.
enum class Subspace { full, centered };

enum class EigStrategy { automatic, lanczos, dense };

struct EigOptions {
  EigStrategy strategy = EigStrategy::automatic;
  /// Residual target ‖Mx − λx‖ ≤ tolerance · max(1, ‖M‖) for unit x.
  double tolerance = 1e-10;
  int max_restarts = 2000;
  std::uint64_t seed = 20170131;
  /// The dense path refuses problems above this size.
  Index dense_limit = 5000;
  /// `automatic` goes dense at or below this size, or when many pairs are wanted.
  Index automatic_dense_below = 600;
};

/// A symmetric matrix seen through matrix-vector products, with bounds on its
/// spectrum (Gershgorin) and an optional dense materialization.
struct SymmetricOperator {
  Index n = 0;
  std::function<VectorXd(const VectorXd&)> apply;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  std::function<MatrixXd()> dense;
};

inline SymmetricOperator make_operator(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw invalid_input("operator must be square");
  SymmetricOperator op;
  op.n = m.rows();
  op.apply = [&m](const VectorXd& x) -> VectorXd { return m * x; };
  VectorXd radius = VectorXd::Zero(op.n), diag = VectorXd::Zero(op.n);
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (it.row() == it.col()) diag(it.row()) += it.value();
      else radius(it.row()) += std::abs(it.value());
    }
  op.upper_bound = op.n ? (diag + radius).maxCoeff() : 0.0;
  op.lower_bound = op.n ? (diag - radius).minCoeff() : 0.0;
  op.dense = [&m]() -> MatrixXd { return MatrixXd(m); };
  return op;
}

inline SymmetricOperator make_operator(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw invalid_input("operator must be square");
  SymmetricOperator op;
  op.n = m.rows();
  op.apply = [&m](const VectorXd& x) -> VectorXd { return m * x; };
  VectorXd diag = m.diagonal();
  VectorXd radius = m.cwiseAbs().rowwise().sum() - diag.cwiseAbs();
  op.upper_bound = op.n ? (diag + radius).maxCoeff() : 0.0;
  op.lower_bound = op.n ? (diag - radius).minCoeff() : 0.0;
  op.dense = [&m]() -> MatrixXd { return m; };
  return op;
}

struct EigResult {
  VectorXd values;   // ordered: descending for largest, ascending for smallest
  MatrixXd vectors;  // unit columns, largest-magnitude entry positive
  int restarts = 0;
  bool used_dense = false;
};

namespace detail {

inline void center_in_place(VectorXd& v) { v.array() -= v.mean(); }

/// Largest-magnitude entry made positive; ties go to the lowest index.
inline void fix_sign(Eigen::Ref<VectorXd> v) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    double a = std::abs(v(i));
    if (a > best_abs * (1.0 + 1e-10)) {
      best = i;
      best_abs = a;
    }
  }
  if (v(best) < 0.0) v = -v;
}

inline VectorXd random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

inline EigResult dense_eigs(const SymmetricOperator& op, Index count, Which which, Subspace sub) {
  const Index n = op.n;
  MatrixXd m = op.dense ? op.dense() : MatrixXd();
  if (!op.dense) {
    m.resize(n, n);
    for (Index j = 0; j < n; ++j) m.col(j) = op.apply(VectorXd::Unit(n, j));
  }
  m = 0.5 * (m + m.transpose()).eval();

  MatrixXd basis_vectors;
  VectorXd values;
  if (sub == Subspace::centered) {
    // Householder reflector R with R·(1/√n) = e₀; its trailing n−1 columns span 1ᗮ.
    VectorXd u = VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    u(0) -= 1.0;
    u.normalize();
    MatrixXd t = m - 2.0 * u * (u.transpose() * m);
    MatrixXd b = t - 2.0 * (t * u) * u.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(b.bottomRightCorner(n - 1, n - 1));
    if (es.info() != Eigen::Success) throw convergence_failure("dense symmetric eigensolver failed");
    values = es.eigenvalues();
    MatrixXd padded = MatrixXd::Zero(n, n - 1);
    padded.bottomRows(n - 1) = es.eigenvectors();
    basis_vectors = padded - 2.0 * u * (u.transpose() * padded);
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw convergence_failure("dense symmetric eigensolver failed");
    values = es.eigenvalues();
    basis_vectors = es.eigenvectors();
  }
  EigResult r;
  r.used_dense = true;
  r.values.resize(count);
  r.vectors.resize(n, count);
  const Index dim = values.size();
  for (Index i = 0; i < count; ++i) {
    Index src = which == Which::largest ? dim - 1 - i : i;
    r.values(i) = values(src);
    r.vectors.col(i) = basis_vectors.col(src);
  }
  return r;
}

/// Restarted block Lanczos with full reorthogonalization. The projected matrix
/// VᵀAV is formed explicitly, so kept Ritz vectors and new directions mix
/// without tracking the band structure. Always extracts the largest pairs of
/// the (possibly shifted) operator.
inline EigResult lanczos_largest(const std::function<VectorXd(const VectorXd&)>& apply, Index n, Index dim,
                                 Index count, Subspace sub, const EigOptions& opt) {
  const Index block = std::clamp<Index>(count, 1, 4);
  const Index m = std::min(dim, std::max<Index>(2 * count + 20, count + 40));
  std::mt19937_64 rng(opt.seed);

  MatrixXd v(n, m + block);
  MatrixXd av(n, m);
  MatrixXd g = MatrixXd::Zero(m, m);
  Index cols = 0;  // columns of v in use (computed + pending)

  auto project = [&](VectorXd& x) {
    if (sub == Subspace::centered) center_in_place(x);
  };
  // Orthonormalize x against v[:, :cols]; returns false if x lies in that span.
  auto orthonormalize = [&](VectorXd& x, double ref) {
    for (int pass = 0; pass < 2; ++pass) {
      project(x);
      if (cols > 0) x -= v.leftCols(cols) * (v.leftCols(cols).transpose() * x);
    }
    project(x);
    double nx = x.norm();
    if (!(nx > 1e-10 * std::max(ref, 1e-300))) return false;
    x /= nx;
    return true;
  };
  auto push_vector = [&](VectorXd x, double ref) {
    if (cols >= dim) return false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (orthonormalize(x, ref)) {
        v.col(cols++) = x;
        return true;
      }
      x = random_unit(n, rng);
      ref = x.norm();
    }
    return false;
  };

  for (Index b = 0; b < block; ++b) {
    VectorXd x = random_unit(n, rng);
    push_vector(x, x.norm());
  }

  Index j = 0;  // number of columns with av computed
  double scale = 1.0;
  EigResult result;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    while (j < m && j < cols) {
      VectorXd w = apply(v.col(j));
      project(w);
      av.col(j) = w;
      VectorXd h = v.leftCols(j + 1).transpose() * w;
      g.col(j).head(j + 1) = h;
      g.row(j).head(j + 1) = h.transpose();
      double wn = w.norm();
      scale = std::max(scale, wn);
      if (cols < v.cols()) push_vector(w, std::max(wn, scale));
      ++j;
    }
    const bool exhausted = j >= dim || j == cols;

    MatrixXd gj = g.topLeftCorner(j, j);
    gj = 0.5 * (gj + gj.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(gj);
    if (es.info() != Eigen::Success) throw convergence_failure("projected eigenproblem failed");
    // descending order
    VectorXd theta = es.eigenvalues().reverse();
    MatrixXd s = es.eigenvectors().rowwise().reverse();
    scale = std::max(scale, theta.cwiseAbs().maxCoeff());

    const Index want = std::min(count, j);
    MatrixXd y = v.leftCols(j) * s.leftCols(want);
    MatrixXd ay = av.leftCols(j) * s.leftCols(want);
    const double tol = opt.tolerance * std::max(1.0, scale);
    bool converged = want == count;
    for (Index i = 0; i < want && converged; ++i)
      converged = (ay.col(i) - theta(i) * y.col(i)).norm() <= tol;
    if (converged || exhausted) {
      // confirm with fresh products; accumulated rounding in av can mislead
      bool ok = want == count;
      for (Index i = 0; i < want && ok; ++i) {
        VectorXd yi = y.col(i);
        VectorXd ayi = apply(yi);
        project(ayi);
        ok = (ayi - theta(i) * yi).norm() <= tol;
      }
      if (ok || exhausted) {
        if (want < count) throw invalid_input("requested more eigenpairs than the subspace dimension");
        if (!ok) throw convergence_failure("eigensolver residual above tolerance on exhausted Krylov space");
        result.values = theta.head(count);
        result.vectors = y;
        result.restarts = restart;
        return result;
      }
    }

    // thick restart: keep the leading Ritz vectors plus pending directions
    const Index keep = std::min(j - 1, std::max(count + (j - count) / 2, count));
    const Index pending = cols - j;
    MatrixXd new_v = v.leftCols(j) * s.leftCols(keep);
    MatrixXd new_av = av.leftCols(j) * s.leftCols(keep);
    MatrixXd pend = v.middleCols(j, pending);
    v.leftCols(keep) = new_v;
    v.middleCols(keep, pending) = pend;
    av.leftCols(keep) = new_av;
    g.setZero();
    g.topLeftCorner(keep, keep).diagonal() = theta.head(keep);
    j = keep;
    cols = keep + pending;
    while (cols < j + block) {
      VectorXd x = random_unit(n, rng);
      if (!push_vector(x, x.norm())) break;
    }
  }
  throw convergence_failure("eigensolver did not converge within " + std::to_string(opt.max_restarts) +
                            " restarts");
}

}  // namespace detail

/// Extreme eigenpairs of a symmetric operator. With Subspace::centered the
/// constant direction is excluded and the returned vectors are centered.
/// Smallest pairs are obtained as the largest of (σI − M), σ the Gershgorin
/// upper bound. Eigenvalues are reported as Rayleigh quotients of the returned
/// unit vectors.
inline EigResult symmetric_eigs(const SymmetricOperator& op, Index count, Which which,
                                Subspace sub = Subspace::full, const EigOptions& opt = {}) {
  const Index n = op.n;
  const Index dim = sub == Subspace::centered ? n - 1 : n;
  if (count < 1) throw invalid_input("eigenpair count must be at least 1");
  if (count >= n || count > dim) throw invalid_input("eigenpair count must be below the problem size");

  bool dense = opt.strategy == EigStrategy::dense ||
               (opt.strategy == EigStrategy::automatic &&
                (n <= opt.automatic_dense_below || 5 * count > n));
  EigResult r;
  if (dense) {
    if (n > opt.dense_limit)
      throw capacity_exceeded("dense eigensolver limited to " + std::to_string(opt.dense_limit) + " nodes");
    r = detail::dense_eigs(op, count, which, sub);
  } else {
    const double sigma = op.upper_bound;
    std::function<VectorXd(const VectorXd&)> apply;
    if (which == Which::largest)
      apply = op.apply;
    else
      apply = [&](const VectorXd& x) -> VectorXd { return sigma * x - op.apply(x); };
    r = detail::lanczos_largest(apply, n, dim, count, sub, opt);
  }

  for (Index i = 0; i < count; ++i) {
    VectorXd x = r.vectors.col(i);
    if (sub == Subspace::centered) detail::center_in_place(x);
    x.normalize();
    detail::fix_sign(x);
    VectorXd mx = op.apply(x);
    if (sub == Subspace::centered) detail::center_in_place(mx);
    r.values(i) = x.dot(mx);
    r.vectors.col(i) = x;
  }
  return r;
}

}  // namespace graphssl
