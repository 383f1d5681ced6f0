// Acceptance checks. Prints one PASS/FAIL/SKIPPED line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "support.hpp"

#ifndef GRAPHSSL_CLI
#define GRAPHSSL_CLI "graphssl"
#endif

using namespace graphssl;
using namespace graphssl::harness;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ------------------------------------------------------------------ 1

Outcome nemenyi() {
  const struct {
    int k, n;
    double cd;
  } cases[] = {{14, 50, 2.81}, {14, 125, 1.77}, {14, 250, 1.25}, {8, 250, 0.66}, {6, 250, 0.48}};
  Outcome o{true, ""};
  for (const auto& c : cases) {
    const double got = nemenyi_cd(c.k, c.n);
    o.pass = o.pass && std::fabs(got - c.cd) <= 0.01;
    o.detail += "CD(" + std::to_string(c.k) + "," + std::to_string(c.n) + ")=" + num(got, 4) + " ";
  }
  return o;
}

// ------------------------------------------------------------------ 2

Outcome eigen_identities() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<Index> size(5, 30);
  double worst_i = 0, worst_c = 0, worst_cr = 0;
  int columns = 0;
  for (int t = 0; t < 20; ++t) {
    const auto g = testing_support::random_connected(rng, size(rng), 0.15);
    if (!g.is_connected()) return {false, "generator produced a disconnected graph"};
    const double n = static_cast<double>(g.n()), vol = g.volume();
    const Index p = g.n() - 1;
    const auto m = moran_embedding(g, p), c = geary_embedding(g, p), l = lpca_embedding(g, p);
    for (Index i = 0; i < p; ++i) {
      worst_i = std::max(worst_i, std::fabs(moran_index(g, m.scores.col(i)) - n / vol * m.eigenvalues(i)));
      worst_c = std::max(worst_c, std::fabs(geary_index(g, c.scores.col(i)) - (n - 1) / vol * c.eigenvalues(i)));
      worst_cr = std::max(worst_cr, std::fabs(contiguity_ratio(g, l.scores.col(i)) - l.eigenvalues(i)));
      columns += 3;
    }
  }
  const bool ok = worst_i < 1e-8 && worst_c < 1e-8 && worst_cr < 1e-8;
  return {ok, std::to_string(columns) + " columns; max error Moran " + num(worst_i, 2) + ", Geary " +
                  num(worst_c, 2) + ", LPCA " + num(worst_cr, 2)};
}

// ------------------------------------------------------------------ 3

Outcome kernel_oracles() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Index> size(3, 20);
  double worst_k = 0;
  for (int t = 0; t < 10; ++t) {
    const auto g = testing_support::random_connected(rng, size(rng), 0.25);
    const MatrixXd k = rctk(g, 0.5).k;
    // Σ_t (αP)ᵗ D⁻¹
    const MatrixXd ap = 0.5 * MatrixXd(transition_matrix(g));
    MatrixXd term = g.degrees().cwiseInverse().asDiagonal(), sum = term;
    for (int s = 0; s < 200; ++s) {
      term = ap * term;
      sum += term;
    }
    worst_k = std::max(worst_k, (k - sum).cwiseAbs().maxCoeff());
  }
  double worst_z = 0;
  std::uniform_int_distribution<Index> small(3, 5);
  std::uniform_real_distribution<double> theta(0.1, 3.0);
  for (int t = 0; t < 10; ++t) {
    const auto g = testing_support::random_connected(rng, small(rng), 0.5);
    const auto ctx = bop_fundamental(g, theta(rng));
    const MatrixXd w(ctx.w);
    const Index n = w.rows();
    MatrixXd term = MatrixXd::Identity(n, n), sum = term;
    for (int s = 0; s < 2000 && term.cwiseAbs().maxCoeff() > 1e-18; ++s) {
      term = term * w;
      sum += term;
    }
    worst_z = std::max(worst_z, (ctx.z - sum).cwiseAbs().maxCoeff());
  }
  return {worst_k < 1e-6 && worst_z < 1e-8,
          "RCTK vs Neumann " + num(worst_k, 2) + ", BoP Z vs path sum " + num(worst_z, 2)};
}

// ------------------------------------------------------------------ 4

Outcome hand_cases() {
  using testing_support::k2;
  using testing_support::path;
  VectorXd x2(2), x3(3);
  x2 << 1, -1;
  x3 << 1, 0, -1;
  std::vector<std::pair<std::string, double>> err;
  err.emplace_back("Moran K2", moran_index(k2(), x2) + 1.0);
  err.emplace_back("Geary K2", geary_index(k2(), x2) - 1.0);
  err.emplace_back("Geary P3", geary_index(path(3), x3) - 0.5);
  err.emplace_back("cr K2", contiguity_ratio(k2(), x2) - 4.0);
  err.emplace_back("cr P3", contiguity_ratio(path(3), x3) - 1.0);
  MatrixXd k2k(2, 2);
  k2k << 4.0 / 3, 2.0 / 3, 2.0 / 3, 4.0 / 3;
  err.emplace_back("RCTK K2", (rctk(k2(), 0.5).k - k2k).cwiseAbs().maxCoeff());
  err.emplace_back("Z K2", (bop_fundamental(k2(), std::log(2.0)).z - k2k).cwiseAbs().maxCoeff());
  const auto lab = testing_support::labeled({0, 1}, {0, 1}, 2);
  std::vector<Index> target{2};
  const auto s = sum_of_similarities_classify(rctk(path(3), 0.5), lab, target);
  err.emplace_back("SoS K31", s.scores(0, 0) - 1.0 / 6);
  err.emplace_back("SoS K32", s.scores(0, 1) - 1.0 / 3);
  bool ok = s.labels[0] == 1;
  double worst = 0;
  std::string bad;
  for (const auto& [name, e] : err) {
    worst = std::max(worst, std::fabs(e));
    if (!(std::fabs(e) < 1e-9)) {
      ok = false;
      bad += name + " ";
    }
  }
  return {ok, std::to_string(err.size() + 1) + " values, max error " + num(worst, 2) +
                  (s.labels[0] == 1 ? ", node 3 -> c2" : ", node 3 misclassified") +
                  (bad.empty() ? "" : "; off: " + bad)};
}

// ---------------------------------------------------------------- 5, 6, 7

std::vector<DatasetBundle> suites() {
  auto sbm = synthetic::sbm({});
  auto blobs = synthetic::blobs({});
  return {sbm, blobs};
}

Outcome trends() {
  testing_support::WarningCapture quiet;
  BenchConfig cfg;
  cfg.seed = 20170131;
  cfg.feature_sets = {100};
  cfg.methods = {MethodId::svm_x, MethodId::ctk_a, MethodId::bop_a, MethodId::svm_dk_ax};
  const auto rep = run_benchmark(suites(), cfg);
  if (!rep.complete()) return {false, "benchmark incomplete: " + std::to_string(rep.failures.size()) + " failures"};
  std::map<std::pair<std::string, std::string>, double> mean;
  std::map<std::pair<std::string, std::string>, int> count;
  for (const auto& r : rep.records) {
    mean[{r.dataset, r.method}] += r.accuracy;
    ++count[{r.dataset, r.method}];
  }
  for (auto& [k, v] : mean) v = 100.0 * v / count[k];
  auto at = [&](const char* d, const char* m) { return mean.at({d, m}); };
  const double s_x = at("sbm", "SVM-X"), s_ctk = at("sbm", "CTK-A"), s_bop = at("sbm", "BoP-A");
  const double b_x = at("blobs", "SVM-X"), b_dk = at("blobs", "SVM-DK-AX"), b_ctk = at("blobs", "CTK-A");
  const bool ok = s_ctk - s_x >= 10 && s_bop - s_x >= 10 && b_x - b_ctk >= 10 && b_dk - b_ctk >= 10;
  return {ok, "SBM: SVM-X " + num(s_x) + ", CTK-A " + num(s_ctk) + ", BoP-A " + num(s_bop) + "; blobs: SVM-X " +
                  num(b_x) + ", SVM-DK-AX " + num(b_dk) + ", CTK-A " + num(b_ctk)};
}

Outcome a_only_invariance() {
  testing_support::WarningCapture quiet;
  auto b = synthetic::sbm({});
  const auto sets = build_feature_sets(b);
  if (sets.size() != 5) return {false, "expected five feature sets"};
  // The benchmark shares these rows by construction, so recompute every
  // feature set independently through the same entry point.
  GraphCache cache(b.graph);
  CvParams cv;
  cv.seed = 6;
  const auto plan = make_cv_plan(b.n(), b.labels, cv);
  const ParameterGrids grids;
  int compared = 0;
  for (MethodId m : {MethodId::bop_a, MethodId::ctk_a})
    for (int fold = 0; fold < 5; ++fold) {
      const auto& split = plan.folds[0][fold];
      std::set<std::string> seen;
      for (const auto& fs : sets) {
        ModelContext ctx{&b.graph, &fs.features, b.num_classes(), &cache, grids, cell_seed(6, 0, fold)};
        const auto gr = grid_search(m, parameter_grid(m, grids), ctx, b.labels, split);
        const auto pred = run_method(m, gr.best, ctx, LabeledSet::from_bundle(b, split.labeled), split.test);
        seen.insert(format_accuracy(accuracy(pred, b.labels, split.test)) + params_json(gr.best));
        ++compared;
      }
      if (seen.size() != 1) return {false, std::string(method_name(m)) + " differs across feature sets"};
    }
  BenchConfig cfg;
  cfg.seed = 6;
  cfg.cv.runs = 1;
  cfg.methods = {MethodId::bop_a, MethodId::ctk_a};
  const auto rep = run_benchmark({b}, cfg);
  std::map<std::tuple<std::string, int>, std::set<double>> by_fold;
  for (const auto& r : rep.records) by_fold[{r.method, r.fold}].insert(r.accuracy);
  for (const auto& [k, v] : by_fold)
    if (v.size() != 1) return {false, "benchmark rows differ across feature sets"};
  return {rep.complete() && rep.feature_sets.size() == 5,
          std::to_string(compared) + " independent evaluations and " + std::to_string(rep.records.size()) +
              " benchmark rows identical across 5F..100F"};
}

Outcome autosvm_contract() {
  testing_support::WarningCapture quiet;
  int calls = 0, converged = 0, cycles = 0, open = 0, later = 0, never = 0;
  std::string bad;
  for (const auto& b : suites()) {
    CvParams cv;
    cv.seed = 7;
    const auto plan = make_cv_plan(b.n(), b.labels, cv);
    for (int run = 0; run < cv.runs; ++run)
      for (int fold = 0; fold < cv.external_folds; ++fold) {
        const auto& split = plan.folds[run][fold];
        const auto lab = LabeledSet::from_bundle(b, split.labeled);
        for (double c : ParameterGrids{}.c) {
          AutoSvmOptions opt;
          opt.svm.seed = cell_seed(7, run, fold);
          const auto res = autosvm_classify(b.graph, b.features, lab, c, opt);
          const auto svm = svm_classify(std::span<const MatrixXd>(&b.features, 1), lab, split.test, c, opt.svm);
          ++calls;
          if (graphssl::detail::labels_at(res.initial_labels, split.test) != svm.labels)
            bad += b.name + " run " + std::to_string(run) + " fold " + std::to_string(fold) + " C " + num(c) +
                   ": round 0 differs; ";
          if (!(res.converged || res.cycle_detected) || res.iterations > 50) {
            ++open;
            AutoSvmOptions longer = opt;
            longer.max_iter = 1000;
            const auto more = autosvm_classify(b.graph, b.features, lab, c, longer);
            later = std::max(later, more.iterations);
            if (!(more.converged || more.cycle_detected)) ++never;
          }
          converged += res.converged;
          cycles += res.cycle_detected;
        }
      }
  }
  std::string detail = std::to_string(calls) + " runs: " + std::to_string(converged) + " converged, " +
                       std::to_string(cycles) + " cycles within 50 rounds";
  if (open > 0)
    detail += ", " + std::to_string(open) + " still moving at 50 (" +
              (never > 0 ? std::to_string(never) + " never settle within 1000" :
                           "all settle by round " + std::to_string(later)) + ")";
  return {bad.empty() && open == 0, detail + (bad.empty() ? "" : "; " + bad.substr(0, 400))};
}

// ------------------------------------------------------------------ 8

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "graphssl_acceptance_determinism";
  fs::remove_all(root);
  synthetic::SbmSpec s;
  s.n = 150;
  s.features = 30;
  s.p_in = 0.1;
  s.p_out = 0.01;
  synthetic::BlobSpec b;
  b.n = 120;
  b.features = 30;
  io::save_dataset(synthetic::sbm(s), root / "sbm");
  io::save_dataset(synthetic::blobs(b), root / "blobs");
  {
    std::ofstream cfg(root / "bench.toml");
    cfg << "runs = 2\nfeature_sets = [5, 10]\ndatasets = [\"sbm\", \"blobs\"]\n"
        << "methods = [\"SVM-X\", \"BoP-A\", \"CTK-A\", \"SVM-M-AX\", \"ASVM-AX\", \"SAR-AX\"]\n"
        << "[grid]\nC = [0.01, 1, 100]\ntheta = [0.001, 1]\np_frac = [0.05, 0.1]\n";
  }
  std::string out[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path dir = root / ("out" + std::to_string(i));
    const std::string cmd = std::string("\"") + GRAPHSSL_CLI + "\" bench --config \"" + (root / "bench.toml").string() +
                            "\" --out \"" + dir.string() + "\" --workers 2 --seed 13 --quiet > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "graphssl bench exited with an error"};
    std::ifstream in(dir / "results.csv", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[i] = ss.str();
  }
  const auto lines = std::count(out[0].begin(), out[0].end(), '\n');
  const bool ok = !out[0].empty() && out[0] == out[1];
  fs::remove_all(root);
  return {ok, std::to_string(lines) + " lines, " + (ok ? "byte-identical" : "outputs differ")};
}

// ------------------------------------------------------------------ 9

Outcome real_data() {
  const char* dir = std::getenv("GRAPHSSL_CORA_DIR");
  if (!dir || !*dir) return {true, "set GRAPHSSL_CORA_DIR to a dataset directory to run", true};
  testing_support::WarningCapture quiet;
  auto b = io::load_dataset(dir);
  const auto ac = class_autocorrelation_report(b);
  BenchConfig cfg;
  cfg.seed = 1;
  cfg.feature_sets = {100};
  cfg.methods = {MethodId::ctk_a};
  const auto rep = run_benchmark({b}, cfg);
  double mean = 0;
  for (const auto& r : rep.records) mean += r.accuracy;
  mean = 100.0 * mean / static_cast<double>(std::max<std::size_t>(1, rep.records.size()));
  const bool ok = rep.complete() && std::fabs(mean - 81.69) <= 3.0 && std::fabs(ac.mean_moran - 0.15) <= 0.05 &&
                  std::fabs(ac.mean_geary - 0.43) <= 0.05 && std::fabs(ac.mean_contiguity - 0.82) <= 0.05;
  return {ok, "CTK-A " + num(mean) + " (ref 81.69), Moran " + num(ac.mean_moran, 3) + " (0.15), Geary " +
                  num(ac.mean_geary, 3) + " (0.43), LPCA " + num(ac.mean_contiguity, 3) + " (0.82)"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "Nemenyi critical differences", 1, nemenyi},
      {2, "eigen-index identities", 10, eigen_identities},
      {3, "kernel series oracles", 10, kernel_oracles},
      {4, "hand-computed small cases", 0, hand_cases},
      {5, "graph-driven vs features-driven trends", 300, trends},
      {6, "feature-free methods invariant across feature sets", 0, a_only_invariance},
      {7, "autoSVM round 0 and termination", 0, autosvm_contract},
      {8, "bench determinism", 0, determinism},
      {9, "real dataset reference values", 0, real_data},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + num(c.budget_s) + " s budget";
    }
    const char* status = o.skipped ? "SKIPPED" : o.pass ? "PASS" : "FAIL";
    failures += !o.pass;
    std::printf("criterion %d: %s - %s: %s (%.2f s)\n", c.id, status, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
