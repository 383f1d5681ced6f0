#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "graphssl/dataset.hpp"
#include "graphssl/harness/cv.hpp"
#include "graphssl/harness/feature_selection.hpp"
#include "graphssl/harness/grid_search.hpp"
#include "graphssl/log.hpp"
#include "graphssl/models.hpp"

namespace graphssl::harness {

struct BenchConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  CvParams cv;
  std::vector<int> feature_sets = default_feature_set_sizes();
  std::vector<std::filesystem::path> datasets;
  std::vector<MethodId> methods{kAllMethods.begin(), kAllMethods.end()};
  ParameterGrids grids;
};

struct Record {
  std::string dataset;
  std::string feature_set;
  std::string method;
  int run = 0;
  int fold = 0;
  std::size_t n_labeled = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  std::string params_json;
};

struct Failure {
  std::string dataset;
  std::string feature_set;
  std::string method;
  int run = 0;
  int fold = 0;
  std::string reason;
};

/// Records in canonical order plus the orderings used to produce it.
struct EvalReport {
  std::vector<Record> records;
  std::vector<Failure> failures;
  std::vector<std::string> datasets;
  std::vector<std::string> feature_sets;
  std::vector<std::string> methods;
  int runs = 0;
  int folds = 0;

  bool complete() const {
    return failures.empty() &&
           records.size() == datasets.size() * feature_sets.size() * methods.size() * static_cast<std::size_t>(runs) *
                                 static_cast<std::size_t>(folds);
  }
};

// ------------------------------------------------------------------ CSV

namespace csv {

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::vector<std::string> parse_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace csv

inline constexpr const char* kResultsHeader =
    "dataset,feature_set,method,run,fold,n_labeled,n_test,accuracy,params_json";

inline std::string format_accuracy(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10f", a);
  return buf;
}

inline std::string to_csv(const Record& r) {
  return csv::quote(r.dataset) + ',' + csv::quote(r.feature_set) + ',' + csv::quote(r.method) + ',' +
         std::to_string(r.run) + ',' + std::to_string(r.fold) + ',' + std::to_string(r.n_labeled) + ',' +
         std::to_string(r.n_test) + ',' + format_accuracy(r.accuracy) + ',' + csv::quote(r.params_json);
}

inline Record record_from_csv(const std::string& line) {
  const auto f = csv::parse_line(line);
  if (f.size() != 9) throw invalid_input("malformed results line: " + line);
  Record r;
  r.dataset = f[0];
  r.feature_set = f[1];
  r.method = f[2];
  r.run = std::stoi(f[3]);
  r.fold = std::stoi(f[4]);
  r.n_labeled = std::stoul(f[5]);
  r.n_test = std::stoul(f[6]);
  r.accuracy = std::stod(f[7]);
  r.params_json = f[8];
  return r;
}

/// Reads a results file (header optional). A truncated last line is ignored.
inline std::vector<Record> read_results(const std::filesystem::path& file) {
  std::vector<Record> out;
  std::ifstream in(file);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == kResultsHeader) continue;
    try {
      out.push_back(record_from_csv(line));
    } catch (const std::exception&) {
      if (in.peek() != std::char_traits<char>::eof()) throw;
      warn("ignoring truncated journal line");
    }
  }
  return out;
}

// ------------------------------------------------------------- running

/// Seed shared by every method for one (run, fold), so ASVM-AX's first round
/// and SVM-X see the same solver stream.
inline std::uint64_t cell_seed(std::uint64_t seed, int run, int fold) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(run * 1009 + fold + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct BenchOptions {
  /// Directory for results.partial.csv; empty disables journaling.
  std::filesystem::path journal_dir;
  bool resume = false;
  /// Called after each finished cell with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

namespace detail {

struct PreparedDataset {
  DatasetBundle bundle;
  std::vector<FeatureSet> feature_sets;
  CvPlan plan;
  std::unique_ptr<GraphCache> cache;
};

struct Cell {
  std::size_t dataset = 0;
  std::size_t feature_set = 0;
  std::size_t method = 0;
  int run = 0;
  int fold = 0;
};

}  // namespace detail

/// Full factorial benchmark over in-memory datasets.
inline EvalReport run_benchmark(std::vector<DatasetBundle> bundles, const BenchConfig& cfg,
                                const BenchOptions& opt = {}) {
  if (bundles.empty()) throw invalid_input("no dataset to benchmark");
  if (cfg.methods.empty()) throw invalid_input("no method to benchmark");
  std::vector<detail::PreparedDataset> data;
  std::set<std::string> names;
  for (auto& b : bundles) {
    if (!names.insert(b.name).second) throw invalid_input("duplicate dataset name " + b.name);
    detail::PreparedDataset d;
    d.feature_sets = build_feature_sets(b, cfg.feature_sets);
    CvParams cv = cfg.cv;
    cv.seed = cfg.seed;
    d.plan = make_cv_plan(b.n(), b.labels, cv);
    d.bundle = std::move(b);
    data.push_back(std::move(d));
  }
  // GraphCache keeps a reference to the graph, so build it once bundles are in place.
  for (auto& d : data) {
    d.cache = std::make_unique<GraphCache>(d.bundle.graph);
    d.cache->reserve_for(cfg.grids);
  }

  EvalReport rep;
  rep.runs = cfg.cv.runs;
  rep.folds = cfg.cv.external_folds;
  for (const auto& d : data) rep.datasets.push_back(d.bundle.name);
  for (MethodId m : cfg.methods) rep.methods.emplace_back(method_name(m));
  // feature-set labels in ascending size over all datasets
  std::set<int> all_sizes;
  for (const auto& d : data)
    for (const auto& fs : d.feature_sets) all_sizes.insert(fs.size);
  for (int s : all_sizes) rep.feature_sets.push_back(feature_set_label(s));

  using Key = std::tuple<std::string, std::string, std::string, int, int>;
  std::map<Key, Record> done;
  std::filesystem::path journal;
  if (!opt.journal_dir.empty()) {
    std::filesystem::create_directories(opt.journal_dir);
    journal = opt.journal_dir / "results.partial.csv";
    if (opt.resume) {
      for (auto& r : read_results(journal)) {
        Key k{r.dataset, r.feature_set, r.method, r.run, r.fold};
        done.emplace(std::move(k), std::move(r));
      }
    } else {
      std::filesystem::remove(journal);
    }
  }
  std::ofstream journal_out;
  if (!journal.empty()) {
    journal_out.open(journal, std::ios::app);
    if (!journal_out) throw invalid_input("cannot write " + journal.string());
  }

  // Feature-free methods run on the first feature set only; their records are
  // copied to the others.
  std::vector<detail::Cell> cells;
  for (std::size_t di = 0; di < data.size(); ++di)
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
      for (std::size_t fi = 0; fi < data[di].feature_sets.size(); ++fi) {
        if (!uses_features(cfg.methods[mi]) && fi > 0) continue;
        for (int run = 0; run < cfg.cv.runs; ++run)
          for (int fold = 0; fold < cfg.cv.external_folds; ++fold) cells.push_back({di, fi, mi, run, fold});
      }

  std::mutex mu;
  std::vector<Record> records;
  std::vector<Failure> failures;
  std::atomic<std::size_t> next{0}, finished{0};

  auto label_of = [&](std::size_t di, std::size_t fi) { return feature_set_label(data[di].feature_sets[fi].size); };

  auto work = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cells.size()) return;
      const auto& c = cells[idx];
      auto& d = data[c.dataset];
      const MethodId m = cfg.methods[c.method];
      const std::string mname(method_name(m));
      const Key key{d.bundle.name, label_of(c.dataset, c.feature_set), mname, c.run, c.fold};
      const bool shared = !uses_features(m);
      {
        std::lock_guard lock(mu);
        auto it = done.find(key);
        if (it != done.end()) {
          records.push_back(it->second);
          if (shared)
            for (std::size_t fi = 1; fi < d.feature_sets.size(); ++fi) {
              Record r = it->second;
              r.feature_set = label_of(c.dataset, fi);
              records.push_back(std::move(r));
            }
          if (opt.progress) opt.progress(++finished, cells.size());
          continue;
        }
      }
      const auto& split = d.plan.folds[c.run][c.fold];
      ModelContext ctx;
      ctx.graph = &d.bundle.graph;
      ctx.features = &d.feature_sets[c.feature_set].features;
      ctx.num_classes = d.bundle.num_classes();
      ctx.cache = d.cache.get();
      ctx.grids = cfg.grids;
      ctx.seed = cell_seed(cfg.seed, c.run, c.fold);
      try {
        const auto gr = grid_search(m, parameter_grid(m, cfg.grids), ctx, d.bundle.labels, split);
        LabeledSet ls = LabeledSet::from_bundle(d.bundle, split.labeled);
        const auto pred = run_method(m, gr.best, ctx, ls, split.test);
        Record r;
        r.dataset = d.bundle.name;
        r.feature_set = std::get<1>(key);
        r.method = mname;
        r.run = c.run;
        r.fold = c.fold;
        r.n_labeled = split.labeled.size();
        r.n_test = split.test.size();
        r.accuracy = accuracy(pred, d.bundle.labels, split.test);
        r.params_json = params_json(gr.best);
        std::lock_guard lock(mu);
        std::vector<Record> out{r};
        if (shared)
          for (std::size_t fi = 1; fi < d.feature_sets.size(); ++fi) {
            out.push_back(r);
            out.back().feature_set = label_of(c.dataset, fi);
          }
        for (auto& o : out) {
          if (journal_out.is_open()) journal_out << to_csv(o) << '\n';
          records.push_back(std::move(o));
        }
        if (journal_out.is_open()) journal_out.flush();
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        std::size_t last = shared ? d.feature_sets.size() : c.feature_set + 1;
        for (std::size_t fi = c.feature_set; fi < last; ++fi)
          failures.push_back({d.bundle.name, label_of(c.dataset, fi), mname, c.run, c.fold, e.what()});
      }
      if (opt.progress) {
        std::lock_guard lock(mu);
        opt.progress(++finished, cells.size());
      }
    }
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // canonical order: dataset and method as configured, feature set by size, run, fold
  auto pos = [](const std::vector<std::string>& v, const std::string& s) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), s) - v.begin());
  };
  auto order = [&](const auto& a, const auto& b) {
    return std::make_tuple(pos(rep.datasets, a.dataset), pos(rep.feature_sets, a.feature_set),
                           pos(rep.methods, a.method), a.run, a.fold) <
           std::make_tuple(pos(rep.datasets, b.dataset), pos(rep.feature_sets, b.feature_set),
                           pos(rep.methods, b.method), b.run, b.fold);
  };
  std::sort(records.begin(), records.end(), order);
  std::sort(failures.begin(), failures.end(), order);
  rep.records = std::move(records);
  rep.failures = std::move(failures);
  return rep;
}

/// Loads the configured dataset directories and runs the benchmark.
inline EvalReport run_benchmark(const BenchConfig& cfg, const BenchOptions& opt = {}) {
  std::vector<DatasetBundle> bundles;
  for (const auto& dir : cfg.datasets) bundles.push_back(io::load_dataset(dir));
  return run_benchmark(std::move(bundles), cfg, opt);
}

}  // namespace graphssl::harness
