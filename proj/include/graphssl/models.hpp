#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <exception>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "graphssl/bop.hpp"
#include "graphssl/classifiers.hpp"
#include "graphssl/dataset.hpp"
#include "graphssl/embeddings.hpp"
#include "graphssl/features.hpp"
#include "graphssl/kernels.hpp"

namespace graphssl {

enum class MethodId {
  svm_x,
  bop_a,
  ctk_a,
  svm_m_a,
  svm_g_a,
  svm_l_a,
  svm_bopm_a,
  sar_ax,
  svm_m_ax,
  svm_g_ax,
  svm_l_ax,
  svm_bopm_ax,
  asvm_ax,
  svm_dk_ax,
};

inline constexpr std::array<MethodId, 14> kAllMethods = {
    MethodId::svm_x,    MethodId::bop_a,    MethodId::ctk_a,    MethodId::svm_m_a,     MethodId::svm_g_a,
    MethodId::svm_l_a,  MethodId::svm_bopm_a, MethodId::sar_ax, MethodId::svm_m_ax,    MethodId::svm_g_ax,
    MethodId::svm_l_ax, MethodId::svm_bopm_ax, MethodId::asvm_ax, MethodId::svm_dk_ax,
};

inline std::string_view method_name(MethodId m) {
  switch (m) {
    case MethodId::svm_x: return "SVM-X";
    case MethodId::bop_a: return "BoP-A";
    case MethodId::ctk_a: return "CTK-A";
    case MethodId::svm_m_a: return "SVM-M-A";
    case MethodId::svm_g_a: return "SVM-G-A";
    case MethodId::svm_l_a: return "SVM-L-A";
    case MethodId::svm_bopm_a: return "SVM-BoPM-A";
    case MethodId::sar_ax: return "SAR-AX";
    case MethodId::svm_m_ax: return "SVM-M-AX";
    case MethodId::svm_g_ax: return "SVM-G-AX";
    case MethodId::svm_l_ax: return "SVM-L-AX";
    case MethodId::svm_bopm_ax: return "SVM-BoPM-AX";
    case MethodId::asvm_ax: return "ASVM-AX";
    case MethodId::svm_dk_ax: return "SVM-DK-AX";
  }
  return "?";
}

/// Case-insensitive lookup of the method acronyms ("ctk-a", "SVM-BoPM-AX", ...).
inline MethodId parse_method(std::string_view s) {
  auto lower = [](std::string_view v) {
    std::string out(v);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
  };
  const std::string key = lower(s);
  for (MethodId m : kAllMethods)
    if (lower(method_name(m)) == key) return m;
  throw invalid_input("unknown method '" + std::string(s) + "'");
}

/// Methods that ignore the node features.
inline bool uses_features(MethodId m) {
  switch (m) {
    case MethodId::bop_a:
    case MethodId::ctk_a:
    case MethodId::svm_m_a:
    case MethodId::svm_g_a:
    case MethodId::svm_l_a:
    case MethodId::svm_bopm_a: return false;
    default: return true;
  }
}

inline bool uses_graph(MethodId m) { return m != MethodId::svm_x; }

inline std::optional<EmbeddingKind> embedding_of(MethodId m) {
  switch (m) {
    case MethodId::svm_m_a:
    case MethodId::svm_m_ax: return EmbeddingKind::moran;
    case MethodId::svm_g_a:
    case MethodId::svm_g_ax: return EmbeddingKind::geary;
    case MethodId::svm_l_a:
    case MethodId::svm_l_ax: return EmbeddingKind::lpca;
    case MethodId::svm_bopm_a:
    case MethodId::svm_bopm_ax: return EmbeddingKind::bop_modularity;
    default: return std::nullopt;
  }
}

struct ModelParams {
  std::optional<double> c;
  std::optional<double> theta;
  std::optional<double> p_frac;
  std::optional<double> alpha;

  auto tie() const { return std::tie(c, theta, p_frac, alpha); }
  bool operator==(const ModelParams& o) const { return tie() == o.tie(); }
  bool operator<(const ModelParams& o) const { return tie() < o.tie(); }
};

/// Shortest %g rendering that parses back to the same double.
inline std::string shortest_number(double v) {
  char buf[32];
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Compact JSON with fixed key order and round-trippable numbers.
inline std::string params_json(const ModelParams& p) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (!v) return;
    if (!first) out << ',';
    first = false;
    out << '"' << key << "\":" << shortest_number(*v);
  };
  put("C", p.c);
  put("theta", p.theta);
  put("p_frac", p.p_frac);
  put("alpha", p.alpha);
  out << '}';
  return out.str();
}

struct ParameterGrids {
  std::vector<double> c = {1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6};
  std::vector<double> theta = {1e-9, 1e-6, 1e-3, 1.0};
  std::vector<double> p_frac = {0.05, 0.10, 0.20, 0.35, 0.50};
  std::vector<double> alpha = {0.2, 0.4, 0.6, 0.8, 1.0};
  /// Fixed graph-kernel parameter of the double-kernel SVM.
  double dk_alpha = 0.8;
};

/// Cartesian grid for one method, in nested order C, θ, p, α.
inline std::vector<ModelParams> parameter_grid(MethodId m, const ParameterGrids& g) {
  const bool c = m != MethodId::bop_a && m != MethodId::ctk_a && m != MethodId::sar_ax;
  const bool theta = m == MethodId::bop_a || m == MethodId::svm_bopm_a || m == MethodId::svm_bopm_ax;
  const bool p = embedding_of(m).has_value();
  const bool alpha = m == MethodId::ctk_a;
  auto axis = [](bool on, const std::vector<double>& v) {
    std::vector<std::optional<double>> out;
    if (!on) {
      out.emplace_back();
    } else {
      if (v.empty()) throw invalid_input("empty parameter grid");
      for (double x : v) out.emplace_back(x);
    }
    return out;
  };
  std::vector<ModelParams> out;
  for (auto cv : axis(c, g.c))
    for (auto tv : axis(theta, g.theta))
      for (auto pv : axis(p, g.p_frac))
        for (auto av : axis(alpha, g.alpha)) out.push_back(ModelParams{cv, tv, pv, av});
  return out;
}

namespace detail {

/// Compute-once table; concurrent callers for the same key wait on one result.
template <class Key, class Value>
class Memo {
 public:
  std::shared_ptr<const Value> get(const Key& key, const std::function<Value()>& make) {
    std::shared_future<std::shared_ptr<const Value>> fut;
    std::promise<std::shared_ptr<const Value>> promise;
    bool owner = false;
    {
      std::lock_guard lock(mu_);
      auto it = table_.find(key);
      if (it == table_.end()) {
        fut = promise.get_future().share();
        table_.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(std::make_shared<const Value>(make()));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

 private:
  std::mutex mu_;
  std::map<Key, std::shared_future<std::shared_ptr<const Value>>> table_;
};

}  // namespace detail

/// Graph-only quantities shared by every feature set, fold and method of one
/// dataset. Safe to use from several threads.
class GraphCache {
 public:
  explicit GraphCache(const Graph& g, EigOptions eig = {}) : g_(g), eig_(eig) {}

  const Graph& graph() const { return g_; }

  const BopContext& bop(double theta) {
    return *bop_.get(theta, [&] { return bop_fundamental(g_, theta); });
  }

  /// First p columns of the embedding, computed once per (kind, θ) at the
  /// size reserved through `reserve_embedding` (or at p when that is larger).
  MatrixXd embedding(EmbeddingKind kind, Index p, double theta = 1.0) {
    Index want = p;
    {
      std::lock_guard lock(mu_);
      want = std::max(want, reserved_p_);
    }
    const auto key =
        std::make_tuple(static_cast<int>(kind), kind == EmbeddingKind::bop_modularity ? theta : 0.0, want);
    auto e = emb_.get(key, [&] {
      switch (kind) {
        case EmbeddingKind::moran: return moran_embedding(g_, want, eig_);
        case EmbeddingKind::geary: return geary_embedding(g_, want, eig_);
        case EmbeddingKind::lpca: return lpca_embedding(g_, want, eig_);
        case EmbeddingKind::bop_modularity: return bop_modularity_embedding(bop(theta), want, eig_);
      }
      throw invalid_input("unknown embedding kind");
    });
    return e->scores.leftCols(p);
  }

  /// Largest embedding any grid point will ask for.
  void reserve_for(const ParameterGrids& grids) {
    Index pmax = 1;
    for (double f : grids.p_frac)
      try {
        pmax = std::max(pmax, embedding_dimension(g_.n(), f));
      } catch (const invalid_input&) {
      }
    reserve_embedding(pmax);
  }

  void reserve_embedding(Index p) {
    std::lock_guard lock(mu_);
    reserved_p_ = std::max(reserved_p_, std::min(p, g_.n() - 1));
  }

  const KernelMatrix& rctk_kernel(double alpha) {
    return *rctk_.get(alpha, [&] { return rctk(g_, alpha); });
  }

  const VectorXd& transition_spectrum() {
    return *spectrum_.get(0, [&] { return transition_eigenvalues(g_); });
  }

 private:
  const Graph& g_;
  EigOptions eig_;
  std::mutex mu_;
  Index reserved_p_ = 0;
  detail::Memo<double, BopContext> bop_;
  detail::Memo<std::tuple<int, double, Index>, Embedding> emb_;
  detail::Memo<double, KernelMatrix> rctk_;
  detail::Memo<int, VectorXd> spectrum_;
};

/// Everything a method may look at for one (dataset, feature set).
struct ModelContext {
  const Graph* graph = nullptr;
  const MatrixXd* features = nullptr;
  int num_classes = 0;
  GraphCache* cache = nullptr;
  ParameterGrids grids;
  std::uint64_t seed = 0;
};

namespace detail {

inline double need(const std::optional<double>& v, const char* name, MethodId m) {
  if (!v) throw invalid_input(std::string(method_name(m)) + " needs parameter " + name);
  return *v;
}

inline Classification run_present(MethodId m, const ModelParams& prm, const ModelContext& ctx,
                                  const LabeledSet& labeled, std::span<const Index> targets) {
  const Graph& g = *ctx.graph;
  const MatrixXd& x = *ctx.features;
  SvmOptions svm;
  svm.seed = ctx.seed;
  auto embed = [&](EmbeddingKind kind) {
    const Index p = embedding_dimension(g.n(), need(prm.p_frac, "p_frac", m));
    const double theta = kind == EmbeddingKind::bop_modularity ? need(prm.theta, "theta", m) : 1.0;
    return ctx.cache->embedding(kind, p, theta);
  };
  switch (m) {
    case MethodId::svm_x:
      return svm_classify(std::span<const MatrixXd>(&x, 1), labeled, targets, need(prm.c, "C", m), svm);
    case MethodId::bop_a:
      return bop_group_betweenness_classify(ctx.cache->bop(need(prm.theta, "theta", m)), labeled, targets);
    case MethodId::ctk_a:
      return sum_of_similarities_classify(ctx.cache->rctk_kernel(need(prm.alpha, "alpha", m)), labeled, targets);
    case MethodId::svm_m_a:
    case MethodId::svm_g_a:
    case MethodId::svm_l_a:
    case MethodId::svm_bopm_a: {
      const MatrixXd e = embed(*embedding_of(m));
      return svm_classify(std::span<const MatrixXd>(&e, 1), labeled, targets, need(prm.c, "C", m), svm);
    }
    case MethodId::svm_m_ax:
    case MethodId::svm_g_ax:
    case MethodId::svm_l_ax:
    case MethodId::svm_bopm_ax: {
      const MatrixXd blocks[2] = {x, embed(*embedding_of(m))};
      return svm_classify(std::span<const MatrixXd>(blocks, 2), labeled, targets, need(prm.c, "C", m), svm);
    }
    case MethodId::sar_ax: {
      const MatrixXd z = compose_features(std::span<const MatrixXd>(&x, 1), labeled.nodes);
      const auto model = sar_fit(g, z, labeled, {}, &ctx.cache->transition_spectrum());
      return sar_classify(model, g, z, targets);
    }
    case MethodId::asvm_ax: {
      AutoSvmOptions opt;
      opt.svm = svm;
      const auto res = autosvm_classify(g, x, labeled, need(prm.c, "C", m), opt);
      Classification out;
      out.labels = res.at(targets);
      out.scores = MatrixXd::Zero(static_cast<Index>(targets.size()), labeled.num_classes);
      for (std::size_t i = 0; i < targets.size(); ++i) out.scores(static_cast<Index>(i), out.labels[i]) = 1.0;
      return out;
    }
    case MethodId::svm_dk_ax: {
      MatrixXd k(g.n(), 2 * g.n());
      k.leftCols(g.n()) = ctx.cache->rctk_kernel(ctx.grids.dk_alpha).k;
      k.rightCols(g.n()) = linear_feature_kernel(x).k;
      return svm_classify(std::span<const MatrixXd>(&k, 1), labeled, targets, need(prm.c, "C", m), svm,
                          ComposeOptions{false});
    }
  }
  throw invalid_input("unknown method");
}

}  // namespace detail

/// Runs one method. Classes absent from the labeled set are removed before the
/// call and can never be predicted; returned labels use the full class range.
inline std::vector<int> run_method(MethodId m, const ModelParams& prm, const ModelContext& ctx,
                                   const LabeledSet& labeled, std::span<const Index> targets) {
  if (!ctx.graph || !ctx.features || !ctx.cache) throw invalid_input("incomplete model context");
  std::vector<int> to_local(static_cast<std::size_t>(ctx.num_classes), -1), to_global;
  for (int y : labeled.labels) {
    if (y < 0 || y >= ctx.num_classes) throw invalid_input("labeled class out of range");
    to_local[y] = 0;
  }
  for (int c = 0; c < ctx.num_classes; ++c)
    if (to_local[c] == 0) {
      to_local[c] = static_cast<int>(to_global.size());
      to_global.push_back(c);
    }
  LabeledSet local;
  local.nodes = labeled.nodes;
  local.num_classes = static_cast<int>(to_global.size());
  for (int y : labeled.labels) local.labels.push_back(to_local[y]);
  auto res = detail::run_present(m, prm, ctx, local, targets);
  std::vector<int> out;
  out.reserve(res.labels.size());
  for (int y : res.labels) out.push_back(to_global[y]);
  return out;
}

/// A classifier bound to its hyperparameters.
using ClassifyFn = std::function<std::vector<int>(const LabeledSet&, std::span<const Index>)>;

inline ClassifyFn make_model(MethodId m, const ModelParams& prm, const ModelContext& ctx) {
  return [m, prm, ctx](const LabeledSet& labeled, std::span<const Index> targets) {
    return run_method(m, prm, ctx, labeled, targets);
  };
}

}  // namespace graphssl
