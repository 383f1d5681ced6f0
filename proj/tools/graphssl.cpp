#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "graphssl/graphssl.hpp"

namespace fs = std::filesystem;
using namespace graphssl;

namespace {

int cmd_bench(const fs::path& config, const fs::path& out, int workers, std::optional<std::uint64_t> seed,
              bool resume, bool quiet) {
  auto cfg = harness::load_bench_config(config);
  if (workers > 0) cfg.workers = workers;
  if (seed) cfg.seed = *seed;
  harness::BenchOptions opt;
  opt.journal_dir = out;
  opt.resume = resume;
  if (!quiet)
    opt.progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r%zu/%zu cells", done, total);
      if (done == total) std::fprintf(stderr, "\n");
    };
  const auto rep = harness::run_benchmark(cfg, opt);
  harness::emit_report(rep, out);
  std::printf("%zu records, %zu failures -> %s\n", rep.records.size(), rep.failures.size(), out.string().c_str());
  for (const auto& t : harness::all_scope_tests(rep))
    if (t.friedman)
      std::printf("%-5s Friedman chi2=%.4f p=%.3g cases=%d%s\n", t.scope.c_str(), t.friedman->statistic,
                  t.friedman->p_value, t.cases, t.cd ? (" CD=" + harness::detail::fmt(*t.cd, 4)).c_str() : "");
  return rep.records.empty() ? 1 : 0;
}

int cmd_autocorr(const fs::path& dir, bool json) {
  const auto b = io::load_dataset(dir);
  const auto r = class_autocorrelation_report(b);
  if (json) {
    nlohmann::json j;
    j["dataset"] = b.name;
    j["nodes"] = b.n();
    j["edges"] = b.graph.edge_count();
    j["class_ids"] = b.class_ids;
    j["moran"] = r.moran;
    j["geary"] = r.geary;
    j["contiguity_ratio"] = r.contiguity;
    j["mean"] = {{"moran", r.mean_moran}, {"geary", r.mean_geary}, {"contiguity_ratio", r.mean_contiguity}};
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::printf("%s: %lld nodes, %lld edges\n", b.name.c_str(), static_cast<long long>(b.n()),
              static_cast<long long>(b.graph.edge_count()));
  std::printf("%-10s %10s %10s %10s\n", "class", "moran", "geary", "cr");
  for (int c = 0; c < b.num_classes(); ++c)
    std::printf("%-10d %10.4f %10.4f %10.4f\n", b.class_ids[c], r.moran[c], r.geary[c], r.contiguity[c]);
  std::printf("%-10s %10.4f %10.4f %10.4f\n", "mean", r.mean_moran, r.mean_geary, r.mean_contiguity);
  return 0;
}

int cmd_embed(const fs::path& dir, const std::string& kind, double p_frac, double theta, const fs::path& out) {
  const auto b = io::load_dataset(dir);
  EmbeddingSpec spec{parse_embedding_kind(kind), p_frac, theta};
  const auto e = compute_embedding(b.graph, spec);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw invalid_input("cannot write " + out.string());
    os = &file;
  }
  os->precision(12);
  *os << "node";
  for (Index j = 0; j < e.scores.cols(); ++j) *os << ",x" << j + 1;
  *os << '\n';
  for (Index i = 0; i < b.n(); ++i) {
    *os << b.node_ids[i];
    for (Index j = 0; j < e.scores.cols(); ++j) *os << ',' << e.scores(i, j);
    *os << '\n';
  }
  std::fprintf(stderr, "%s embedding: %lld nodes x %lld dims; eigenvalues", kind.c_str(),
               static_cast<long long>(b.n()), static_cast<long long>(e.scores.cols()));
  for (Index j = 0; j < std::min<Index>(e.eigenvalues.size(), 8); ++j) std::fprintf(stderr, " %.6g", e.eigenvalues(j));
  std::fprintf(stderr, e.eigenvalues.size() > 8 ? " ...\n" : "\n");
  return 0;
}

int cmd_classify(const fs::path& dir, const std::string& method, const std::string& params_text,
                 std::optional<double> c, std::optional<double> theta, std::optional<double> alpha,
                 std::optional<double> p_frac, std::uint64_t seed, const fs::path& out) {
  const MethodId m = parse_method(method);
  auto b = io::load_dataset(dir);
  ModelParams prm;
  if (!params_text.empty()) {
    const auto j = nlohmann::json::parse(params_text);
    for (auto it = j.begin(); it != j.end(); ++it) {
      const double v = it.value().get<double>();
      if (it.key() == "C" || it.key() == "c") prm.c = v;
      else if (it.key() == "theta") prm.theta = v;
      else if (it.key() == "alpha") prm.alpha = v;
      else if (it.key() == "p_frac") prm.p_frac = v;
      else throw invalid_input("unknown parameter '" + it.key() + "'");
    }
  }
  if (c) prm.c = c;
  if (theta) prm.theta = theta;
  if (alpha) prm.alpha = alpha;
  if (p_frac) prm.p_frac = p_frac;

  harness::CvParams cvp;
  cvp.runs = 1;
  cvp.seed = seed;
  const auto plan = harness::make_cv_plan(b.n(), b.labels, cvp);
  const auto& split = plan.folds[0][0];
  GraphCache cache(b.graph);
  ModelContext ctx;
  ctx.graph = &b.graph;
  ctx.features = &b.features;
  ctx.num_classes = b.num_classes();
  ctx.cache = &cache;
  ctx.seed = harness::cell_seed(seed, 0, 0);
  cache.reserve_for(ctx.grids);

  // Parameters not given on the command line are tuned on the labeled nodes.
  std::vector<ModelParams> grid;
  for (auto g : parameter_grid(m, ctx.grids)) {
    if (prm.c) g.c = g.c ? prm.c : g.c;
    if (prm.theta) g.theta = g.theta ? prm.theta : g.theta;
    if (prm.alpha) g.alpha = g.alpha ? prm.alpha : g.alpha;
    if (prm.p_frac) g.p_frac = g.p_frac ? prm.p_frac : g.p_frac;
    if (std::find(grid.begin(), grid.end(), g) == grid.end()) grid.push_back(g);
  }
  const auto chosen = harness::grid_search(m, grid, ctx, b.labels, split).best;
  const auto pred = run_method(m, chosen, ctx, LabeledSet::from_bundle(b, split.labeled), split.test);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw invalid_input("cannot write " + out.string());
    os = &file;
  }
  *os << "node\tpredicted\ttrue\n";
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    const Index v = split.test[i];
    *os << b.node_ids[v] << '\t' << b.class_ids[pred[i]] << '\t' << b.class_ids[b.labels[v]] << '\n';
  }
  std::fprintf(stderr, "%s %s: %zu labeled, %zu predicted, accuracy %.4f\n", std::string(method_name(m)).c_str(),
               params_json(chosen).c_str(), split.labeled.size(), split.test.size(),
               harness::accuracy(pred, b.labels, split.test));
  return 0;
}

int cmd_generate(const std::string& kind, const fs::path& out, std::uint64_t seed, Index n) {
  DatasetBundle b;
  if (kind == "sbm") {
    synthetic::SbmSpec s;
    s.seed = seed;
    if (n > 0) s.n = n;
    b = synthetic::sbm(s);
  } else if (kind == "blobs") {
    synthetic::BlobSpec s;
    s.seed = seed;
    if (n > 0) s.n = n;
    b = synthetic::blobs(s);
  } else {
    throw invalid_input("unknown generator '" + kind + "' (sbm or blobs)");
  }
  io::save_dataset(b, out);
  std::printf("wrote %s: %lld nodes, %lld edges, %lld features\n", out.string().c_str(),
              static_cast<long long>(b.n()), static_cast<long long>(b.graph.edge_count()),
              static_cast<long long>(b.features.cols()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based semi-supervised classification toolkit"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "run the nested cross-validation benchmark");
  fs::path config, out_dir;
  int workers = 0;
  std::uint64_t seed_value = 0;
  bool resume = false, quiet = false;
  bench->add_option("--config", config, "benchmark config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", out_dir, "output directory")->required();
  bench->add_option("--workers", workers, "worker threads (overrides config)");
  auto* seed_opt = bench->add_option("--seed", seed_value, "seed (overrides config)");
  bench->add_flag("--resume", resume, "skip cells already in results.partial.csv");
  bench->add_flag("--quiet", quiet, "no progress output");

  auto* autocorr = app.add_subcommand("autocorr", "class-membership autocorrelation of a dataset");
  fs::path ac_dir;
  bool ac_json = false;
  autocorr->add_option("DIR", ac_dir)->required()->check(CLI::ExistingDirectory);
  autocorr->add_flag("--json", ac_json, "print JSON");

  auto* embed = app.add_subcommand("embed", "compute a structural embedding");
  fs::path em_dir, em_out;
  std::string em_kind = "moran";
  double em_p = 0.05, em_theta = 1.0;
  embed->add_option("DIR", em_dir)->required()->check(CLI::ExistingDirectory);
  embed->add_option("--kind", em_kind, "moran, geary, lpca or bopmod")
      ->check(CLI::IsMember({"moran", "geary", "lpca", "bopmod"}));
  embed->add_option("--p-frac", em_p, "dimensions as a fraction of the node count");
  embed->add_option("--theta", em_theta, "inverse temperature (bopmod)");
  embed->add_option("--out", em_out, "CSV output (default stdout)");

  auto* classify = app.add_subcommand("classify", "classify the unlabeled nodes of one random split");
  fs::path cl_dir, cl_out;
  std::string cl_method, cl_params;
  std::optional<double> cl_c, cl_theta, cl_alpha, cl_p;
  std::uint64_t cl_seed = 0;
  classify->add_option("DIR", cl_dir)->required()->check(CLI::ExistingDirectory);
  classify->add_option("--method", cl_method, "method acronym, e.g. CTK-A")->required();
  classify->add_option("--params", cl_params, "JSON object of hyperparameters");
  classify->add_option("--C", cl_c);
  classify->add_option("--theta", cl_theta);
  classify->add_option("--alpha", cl_alpha);
  classify->add_option("--p-frac", cl_p);
  classify->add_option("--seed", cl_seed);
  classify->add_option("--out", cl_out, "predictions TSV (default stdout)");

  auto* generate = app.add_subcommand("generate", "write a synthetic dataset directory");
  std::string gen_kind;
  fs::path gen_out;
  std::uint64_t gen_seed = 1;
  Index gen_n = 0;
  generate->add_option("KIND", gen_kind, "sbm or blobs")->required()->check(CLI::IsMember({"sbm", "blobs"}));
  generate->add_option("--out", gen_out)->required();
  generate->add_option("--seed", gen_seed);
  generate->add_option("--n", gen_n, "node count");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*bench)
      return cmd_bench(config, out_dir, workers, seed_opt->count() ? std::optional(seed_value) : std::nullopt, resume,
                       quiet);
    if (*autocorr) return cmd_autocorr(ac_dir, ac_json);
    if (*embed) return cmd_embed(em_dir, em_kind, em_p, em_theta, em_out);
    if (*classify)
      return cmd_classify(cl_dir, cl_method, cl_params, cl_c, cl_theta, cl_alpha, cl_p, cl_seed, cl_out);
    if (*generate) return cmd_generate(gen_kind, gen_out, gen_seed, gen_n);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
