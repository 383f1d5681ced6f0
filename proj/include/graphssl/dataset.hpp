#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include "graphssl/graph.hpp"

namespace graphssl {

/// Graph + node features + class labels. Labels are dense class indices
/// 0..q-1; `class_ids` maps them back to the ids used on disk.
struct DatasetBundle {
  Graph graph;
  MatrixXd features;          // n × m
  std::vector<int> labels;    // length n
  std::vector<int> class_ids; // length q
  std::vector<Index> node_ids;  // original node id per row
  std::string name;

  Index n() const { return graph.n(); }
  int num_classes() const { return static_cast<int>(class_ids.size()); }

  void validate() const {
    if (features.rows() != graph.n()) throw invalid_input("feature rows differ from node count");
    if (static_cast<Index>(labels.size()) != graph.n()) throw invalid_input("label count differs from node count");
    if (num_classes() < 2) throw invalid_input("a dataset needs at least two classes");
    for (int y : labels)
      if (y < 0 || y >= num_classes()) throw invalid_input("label outside class range");
  }
};

/// Nodes whose labels are visible to a classifier, with their classes.
struct LabeledSet {
  std::vector<Index> nodes;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return nodes.size(); }

  /// Node lists per class; throws if any class has no labeled node.
  std::vector<std::vector<Index>> by_class() const {
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (labels[i] < 0 || labels[i] >= num_classes) throw invalid_input("labeled class out of range");
      out[labels[i]].push_back(nodes[i]);
    }
    for (int c = 0; c < num_classes; ++c)
      if (out[c].empty()) throw invalid_input("class " + std::to_string(c) + " has no labeled node");
    return out;
  }

  static LabeledSet from_bundle(const DatasetBundle& b, std::vector<Index> nodes) {
    LabeledSet s;
    s.num_classes = b.num_classes();
    s.labels.reserve(nodes.size());
    for (Index v : nodes) s.labels.push_back(b.labels[v]);
    s.nodes = std::move(nodes);
    return s;
  }
};

/// Predicted class per target plus per-class scores (rows follow `targets`).
struct Classification {
  std::vector<int> labels;
  MatrixXd scores;
};

/// Argmax per row, ties resolved to the lowest class index.
inline std::vector<int> argmax_rows(const MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[i] = static_cast<int>(best);
  }
  return out;
}

namespace io {

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

inline bool skip_line(const std::string& line) {
  auto p = line.find_first_not_of(" \t\r");
  return p == std::string::npos || line[p] == '#';
}

inline std::ifstream open(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw invalid_input("cannot open " + p.string());
  return in;
}

inline long long parse_int(const std::string& s, const std::filesystem::path& file, std::size_t line) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size() && s.find_first_not_of(" \r", pos) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw invalid_input(file.string() + ":" + std::to_string(line) + ": expected integer, got '" + s + "'");
  }
}

inline double parse_double(const std::string& s, const std::filesystem::path& file, std::size_t line) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw invalid_input(file.string() + ":" + std::to_string(line) + ": expected number, got '" + s + "'");
  }
}

}  // namespace detail

inline std::vector<Edge> read_edges(const std::filesystem::path& file) {
  auto in = detail::open(file);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skip_line(line)) continue;
    auto f = detail::split(line, '\t');
    if (f.size() < 2) throw invalid_input(file.string() + ":" + std::to_string(lineno) + ": expected src<TAB>dst[<TAB>weight]");
    Edge e;
    e.src = detail::parse_int(f[0], file, lineno);
    e.dst = detail::parse_int(f[1], file, lineno);
    e.weight = f.size() >= 3 ? detail::parse_double(f[2], file, lineno) : 1.0;
    edges.push_back(e);
  }
  return edges;
}

/// Loads `edges.tsv`, `labels.tsv` and either `features.tsv` (sparse triplets)
/// or `features.dense.csv` from a dataset directory. The graph is symmetrized
/// and reduced to its largest connected component; features and labels follow.
inline DatasetBundle load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  DatasetBundle b;
  b.name = dir.filename().string();
  if (b.name.empty()) b.name = dir.parent_path().filename().string();

  // labels: node id TAB class id
  std::map<Index, long long> raw_labels;
  {
    auto file = dir / "labels.tsv";
    auto in = detail::open(file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::skip_line(line)) continue;
      auto f = detail::split(line, '\t');
      if (f.size() < 2) throw invalid_input(file.string() + ":" + std::to_string(lineno) + ": expected node<TAB>class");
      raw_labels[detail::parse_int(f[0], file, lineno)] = detail::parse_int(f[1], file, lineno);
    }
  }
  if (raw_labels.empty()) throw invalid_input("labels.tsv is empty");
  Index n_total = raw_labels.rbegin()->first + 1;
  if (static_cast<Index>(raw_labels.size()) != n_total || raw_labels.begin()->first != 0)
    throw invalid_input("labels.tsv must label every node id 0..n-1");

  auto edges = read_edges(dir / "edges.tsv");
  for (const auto& e : edges)
    if (e.src >= n_total || e.dst >= n_total) throw invalid_input("edge references unlabeled node id");
  BuildOptions opts;
  opts.node_count = n_total;
  auto built = build_graph(edges, opts);

  // features
  MatrixXd full;
  if (fs::exists(dir / "features.tsv")) {
    auto file = dir / "features.tsv";
    auto in = detail::open(file);
    std::vector<std::tuple<Index, Index, double>> trip;
    Index m = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::skip_line(line)) continue;
      auto f = detail::split(line, '\t');
      if (f.size() < 3) throw invalid_input(file.string() + ":" + std::to_string(lineno) + ": expected node<TAB>feature<TAB>value");
      Index node = detail::parse_int(f[0], file, lineno);
      Index feat = detail::parse_int(f[1], file, lineno);
      if (node < 0 || node >= n_total || feat < 0) throw invalid_input(file.string() + ":" + std::to_string(lineno) + ": index out of range");
      trip.emplace_back(node, feat, detail::parse_double(f[2], file, lineno));
      m = std::max(m, feat + 1);
    }
    full = MatrixXd::Zero(n_total, m);
    for (auto [i, j, v] : trip) full(i, j) += v;
  } else if (fs::exists(dir / "features.dense.csv")) {
    auto file = dir / "features.dense.csv";
    auto in = detail::open(file);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::skip_line(line)) continue;
      auto f = detail::split(line, ',');
      if (rows.empty() && lineno == 1) {
        // optional header row
        bool numeric = true;
        try {
          for (auto& s : f) (void)std::stod(s);
        } catch (const std::exception&) {
          numeric = false;
        }
        if (!numeric) continue;
      }
      std::vector<double> r;
      for (auto& s : f) r.push_back(detail::parse_double(s, file, lineno));
      rows.push_back(std::move(r));
    }
    if (static_cast<Index>(rows.size()) != n_total) throw invalid_input("features.dense.csv must have one row per node");
    Index m = rows.empty() ? 0 : static_cast<Index>(rows[0].size());
    full.resize(n_total, m);
    for (Index i = 0; i < n_total; ++i) {
      if (static_cast<Index>(rows[i].size()) != m) throw invalid_input("ragged features.dense.csv");
      for (Index j = 0; j < m; ++j) full(i, j) = rows[i][j];
    }
  } else {
    throw invalid_input("dataset has neither features.tsv nor features.dense.csv: " + dir.string());
  }

  Index n = built.graph.n();
  b.features.resize(n, full.cols());
  for (Index i = 0; i < n; ++i) b.features.row(i) = full.row(built.kept[i]);
  b.node_ids = built.kept;

  std::map<long long, int> class_index;
  for (Index i = 0; i < n; ++i) class_index[raw_labels[built.kept[i]]] = 0;
  int q = 0;
  for (auto& [id, idx] : class_index) {
    idx = q++;
    b.class_ids.push_back(static_cast<int>(id));
  }
  b.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) b.labels[i] = class_index[raw_labels[built.kept[i]]];
  b.graph = std::move(built.graph);
  b.validate();
  return b;
}

/// Writes a bundle in the directory layout read by `load_dataset`, using node
/// row indices as ids. Both arc directions are written so that reloading with
/// symmetrization reproduces the weights.
inline void save_dataset(const DatasetBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw invalid_input("cannot write " + (dir / name).string());
    out << std::setprecision(17);
    return out;
  };
  {
    auto out = open("edges.tsv");
    const auto& a = b.graph.adjacency();
    for (Index k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it)
        out << it.row() << '\t' << it.col() << '\t' << it.value() << '\n';
  }
  {
    auto out = open("features.tsv");
    const Index m = b.features.cols();
    for (Index i = 0; i < b.features.rows(); ++i)
      for (Index j = 0; j < m; ++j)
        if (b.features(i, j) != 0.0) out << i << '\t' << j << '\t' << b.features(i, j) << '\n';
    // keep the feature count when trailing columns are all zero
    if (m > 0 && b.features.rows() > 0 && (b.features.col(m - 1).array() == 0.0).all())
      out << 0 << '\t' << m - 1 << '\t' << 0 << '\n';
  }
  {
    auto out = open("labels.tsv");
    for (Index i = 0; i < b.n(); ++i) out << i << '\t' << b.class_ids[b.labels[i]] << '\n';
  }
}

}  // namespace io
}  // namespace graphssl
