#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graphssl/harness/benchmark.hpp"
#include "graphssl/harness/grid_search.hpp"
#include "graphssl/harness/stats.hpp"

namespace graphssl::harness {

struct Aggregate {
  std::string dataset;
  std::string feature_set;
  std::string method;
  std::size_t count = 0;
  double mean = 0.0;
  /// Sample std pooled over every (run, fold) record.
  double std = 0.0;
  /// Most frequently selected value per hyperparameter.
  std::map<std::string, double> modes;
};

inline std::vector<Aggregate> aggregate(const EvalReport& rep) {
  std::vector<Aggregate> out;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  std::vector<std::vector<double>> values;
  std::vector<std::map<std::string, std::vector<double>>> params;
  for (const auto& r : rep.records) {
    auto key = std::make_tuple(r.dataset, r.feature_set, r.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      Aggregate a;
      a.dataset = r.dataset;
      a.feature_set = r.feature_set;
      a.method = r.method;
      out.push_back(std::move(a));
      values.emplace_back();
      params.emplace_back();
    }
    values[it->second].push_back(r.accuracy);
    const auto j = nlohmann::json::parse(r.params_json);
    for (auto p = j.begin(); p != j.end(); ++p) params[it->second][p.key()].push_back(p.value().get<double>());
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    out[i].count = v.size();
    double s = 0.0;
    for (double x : v) s += x;
    out[i].mean = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - out[i].mean) * (x - out[i].mean);
    out[i].std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    for (const auto& [name, vals] : params[i]) out[i].modes[name] = *mode_of(vals);
  }
  return out;
}

struct ScopeTest {
  std::string scope;  // feature-set label, or "all"
  std::vector<std::string> methods;
  int cases = 0;
  std::optional<FriedmanResult> friedman;
  std::optional<double> cd;
  std::string skipped;
};

/// Friedman/Nemenyi over cases built from run means of fold accuracies. A
/// feature-set scope uses (dataset, run) cases; "all" uses (dataset, feature
/// set, run). Cases missing any method are left out.
inline ScopeTest scope_test(const EvalReport& rep, const std::string& scope) {
  ScopeTest t;
  t.scope = scope;
  t.methods = rep.methods;
  using CaseKey = std::tuple<std::string, std::string, int>;
  std::map<CaseKey, std::map<std::string, std::vector<double>>> cells;
  for (const auto& r : rep.records) {
    if (scope != "all" && r.feature_set != scope) continue;
    cells[{r.dataset, r.feature_set, r.run}][r.method].push_back(r.accuracy);
  }
  std::vector<std::vector<double>> table(rep.methods.size());
  for (const auto& [key, by_method] : cells) {
    bool full = by_method.size() == rep.methods.size();
    for (const auto& [m, v] : by_method) full = full && static_cast<int>(v.size()) == rep.folds;
    if (!full) continue;
    for (std::size_t m = 0; m < rep.methods.size(); ++m) {
      const auto& v = by_method.at(rep.methods[m]);
      double s = 0.0;
      for (double x : v) s += x;
      table[m].push_back(s / static_cast<double>(v.size()));
    }
    ++t.cases;
  }
  if (rep.methods.size() < 3) {
    t.skipped = "fewer than 3 methods";
  } else if (t.cases < 2) {
    t.skipped = "fewer than 2 complete cases";
  } else {
    t.friedman = friedman_test(table);
    try {
      t.cd = nemenyi_cd(static_cast<int>(rep.methods.size()), t.cases);
    } catch (const invalid_input& e) {
      t.skipped = e.what();
    }
  }
  return t;
}

inline std::vector<ScopeTest> all_scope_tests(const EvalReport& rep) {
  std::vector<ScopeTest> out;
  for (const auto& fs : rep.feature_sets) out.push_back(scope_test(rep, fs));
  out.push_back(scope_test(rep, "all"));
  return out;
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

/// Critical-difference diagram: rank axis (1 at the left), one labelled
/// leader line per method, the CD bar above the axis and a thick bar under
/// every maximal group of methods whose ranks lie within one CD.
inline std::string cd_diagram_svg(const std::vector<std::string>& methods, const std::vector<double>& mean_ranks,
                                  double cd, const std::string& title = {}) {
  using detail::fmt;
  const auto k = static_cast<int>(methods.size());
  if (k < 2 || mean_ranks.size() != methods.size()) throw invalid_input("CD diagram needs matching ranks");
  std::vector<std::size_t> order(methods.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mean_ranks[a] < mean_ranks[b]; });

  const double width = 760, left = 170, right = width - 170, axis_y = 90;
  const int half = (k + 1) / 2;
  const double height = axis_y + 40 + 22.0 * std::max(half, k - half) + 40;
  auto x_of = [&](double r) { return left + (right - left) * (r - 1.0) / std::max(1, k - 1); };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << fmt(height, 0)
    << "\" viewBox=\"0 0 " << width << ' ' << fmt(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) s << "<text x=\"10\" y=\"18\">" << detail::xml_escape(title) << "</text>\n";
  // axis and ticks
  s << "<line x1=\"" << fmt(left) << "\" y1=\"" << axis_y << "\" x2=\"" << fmt(right) << "\" y2=\"" << axis_y
    << "\" stroke=\"black\"/>\n";
  for (int r = 1; r <= k; ++r) {
    s << "<line x1=\"" << fmt(x_of(r)) << "\" y1=\"" << axis_y - 5 << "\" x2=\"" << fmt(x_of(r)) << "\" y2=\""
      << axis_y << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fmt(x_of(r)) << "\" y=\"" << axis_y - 9 << "\" text-anchor=\"middle\">" << r << "</text>\n";
  }
  // CD bar
  const double cd_y = 40;
  s << "<line x1=\"" << fmt(x_of(1)) << "\" y1=\"" << cd_y << "\" x2=\"" << fmt(x_of(1) + (x_of(2) - x_of(1)) * cd)
    << "\" y2=\"" << cd_y << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  s << "<text x=\"" << fmt(x_of(1)) << "\" y=\"" << cd_y - 6 << "\">CD = " << fmt(cd) << "</text>\n";
  // method leader lines
  for (int i = 0; i < k; ++i) {
    const auto m = order[i];
    const bool on_left = i < half;
    const int slot = on_left ? i : k - 1 - i;
    const double y = axis_y + 40 + 22.0 * slot;
    const double x = x_of(mean_ranks[m]);
    const double end = on_left ? left - 10 : right + 10;
    s << "<polyline points=\"" << fmt(x) << ',' << axis_y << ' ' << fmt(x) << ',' << fmt(y) << ' ' << fmt(end) << ','
      << fmt(y) << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << fmt(on_left ? end - 4 : end + 4) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\""
      << (on_left ? "end" : "start") << "\">" << detail::xml_escape(methods[m]) << " (" << fmt(mean_ranks[m])
      << ")</text>\n";
  }
  // groups
  int last_end = -1, row = 0;
  for (int i = 0; i < k; ++i) {
    int j = i;
    while (j + 1 < k && mean_ranks[order[j + 1]] - mean_ranks[order[i]] <= cd) ++j;
    if (j > i && j > last_end) {
      const double y = axis_y + 12 + 6.0 * row++;
      s << "<line x1=\"" << fmt(x_of(mean_ranks[order[i]]) - 3) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(x_of(mean_ranks[order[j]]) + 3) << "\" y2=\"" << fmt(y)
        << "\" stroke=\"black\" stroke-width=\"4\"/>\n";
      last_end = j;
    }
  }
  s << "</svg>\n";
  return s.str();
}

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw invalid_input("cannot write " + p.string());
  return out;
}

inline nlohmann::json fr_json(const ScopeTest& t) {
  nlohmann::json j;
  j["scope"] = t.scope;
  j["cases"] = t.cases;
  j["methods"] = t.methods;
  if (t.friedman) {
    nlohmann::json ranks = nlohmann::json::object();
    for (std::size_t m = 0; m < t.methods.size(); ++m) ranks[t.methods[m]] = t.friedman->mean_ranks[m];
    j["mean_ranks"] = ranks;
    j["friedman"] = {{"statistic", t.friedman->statistic},
                     {"p_value", t.friedman->p_value},
                     {"df", t.friedman->degrees_of_freedom}};
  }
  if (t.cd) {
    j["nemenyi_cd"] = *t.cd;
    nlohmann::json pairs = nlohmann::json::array();
    const auto sig = nemenyi_significance(t.friedman->mean_ranks, *t.cd);
    for (std::size_t a = 0; a < t.methods.size(); ++a)
      for (std::size_t b = a + 1; b < t.methods.size(); ++b)
        if (sig[a][b]) pairs.push_back({t.methods[a], t.methods[b]});
    j["significant_pairs"] = pairs;
  }
  if (!t.skipped.empty()) j["skipped"] = t.skipped;
  return j;
}
}  // namespace detail

inline void write_results_csv(const EvalReport& rep, const std::filesystem::path& file) {
  auto out = detail::open_out(file);
  out << kResultsHeader << '\n';
  for (const auto& r : rep.records) out << to_csv(r) << '\n';
}

/// results.csv, failures.csv, summary.json, ranks.csv and one cd_<scope>.svg
/// per tested scope.
inline void emit_report(const EvalReport& rep, const std::filesystem::path& dir) {
  if (rep.records.empty() && rep.failures.empty()) throw invalid_input("empty report");
  std::filesystem::create_directories(dir);
  write_results_csv(rep, dir / "results.csv");
  {
    auto out = detail::open_out(dir / "failures.csv");
    out << "dataset,feature_set,method,run,fold,reason\n";
    for (const auto& f : rep.failures)
      out << csv::quote(f.dataset) << ',' << csv::quote(f.feature_set) << ',' << csv::quote(f.method) << ','
          << f.run << ',' << f.fold << ',' << csv::quote(f.reason) << '\n';
  }
  const auto aggs = aggregate(rep);
  const auto tests = all_scope_tests(rep);

  nlohmann::json summary;
  summary["complete"] = rep.complete();
  summary["records"] = rep.records.size();
  summary["failures"] = rep.failures.size();
  summary["runs"] = rep.runs;
  summary["folds"] = rep.folds;
  nlohmann::json agg = nlohmann::json::array();
  for (const auto& a : aggs) {
    nlohmann::json modes = nlohmann::json::object();
    for (const auto& [k, v] : a.modes) modes[k] = v;
    agg.push_back({{"dataset", a.dataset},
                   {"feature_set", a.feature_set},
                   {"method", a.method},
                   {"count", a.count},
                   {"mean_accuracy", a.mean},
                   {"std_accuracy", a.std},
                   {"parameter_modes", modes}});
  }
  summary["aggregates"] = agg;
  nlohmann::json tj = nlohmann::json::array();
  for (const auto& t : tests) tj.push_back(detail::fr_json(t));
  summary["tests"] = tj;
  detail::open_out(dir / "summary.json") << summary.dump(2) << '\n';

  auto ranks = detail::open_out(dir / "ranks.csv");
  ranks << "scope,method,mean_rank,cases\n";
  for (const auto& t : tests) {
    if (!t.friedman) continue;
    for (std::size_t m = 0; m < t.methods.size(); ++m)
      ranks << t.scope << ',' << csv::quote(t.methods[m]) << ',' << detail::fmt(t.friedman->mean_ranks[m], 6) << ','
            << t.cases << '\n';
    if (t.cd)
      detail::open_out(dir / ("cd_" + t.scope + ".svg"))
          << cd_diagram_svg(t.methods, t.friedman->mean_ranks, *t.cd, "Mean ranks, " + t.scope);
  }
}

}  // namespace graphssl::harness
