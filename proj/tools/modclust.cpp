// modclust: interaction-module detection over gene networks.
// Correlation metrics, prior-cluster supervision, network deconvolution,
// single-linkage clustering, and pairwise evaluation, glued together over
// tab-separated files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "modclust/corrmat.hpp"
#include "modclust/core.hpp"
#include "modclust/deconv.hpp"
#include "modclust/evalkit.hpp"
#include "modclust/hac.hpp"
#include "modclust/io.hpp"
#include "modclust/metagene.hpp"
#include "modclust/pipeline.hpp"
#include "modclust/priors.hpp"
#include "modclust/synthbench.hpp"

namespace {

using namespace modclust;

corrmat::MetricConfig make_metric_config(const std::string& metric,
                                         const std::string& discretization,
                                         const std::string& bins) {
  corrmat::MetricConfig cfg;
  auto tag = metric_from_string(metric);
  if (!tag)
    throw ValidationError("unknown metric '" + metric +
                          "' (expected pcc, dcc, mi1, mi2, or mi3)");
  cfg.metric = *tag;
  if (discretization == "width")
    cfg.discretization = corrmat::Discretization::EqualWidth;
  else if (discretization == "freq")
    cfg.discretization = corrmat::Discretization::EqualFrequency;
  else
    throw ValidationError("unknown discretization '" + discretization +
                          "' (expected width or freq)");
  if (bins == "auto") {
    cfg.bins = corrmat::MetricConfig::kAutoBins;
  } else {
    try {
      cfg.bins = std::stoi(bins);
    } catch (const std::exception&) {
      throw ValidationError("bins must be 'auto' or an integer >= 2");
    }
    if (cfg.bins < 2)
      throw ValidationError("bins must be 'auto' or an integer >= 2");
  }
  return cfg;
}

priors::SupervisionConfig make_supervision_config(double rho_hat, bool certain,
                                                  bool off,
                                                  const std::string& mode) {
  priors::SupervisionConfig cfg;
  if (certain && off)
    throw ValidationError("--certain and --off are mutually exclusive");
  if (certain)
    cfg.policy = priors::RhoPolicy::Certain;
  else if (off)
    cfg.policy = priors::RhoPolicy::Off;
  else
    cfg.policy = priors::RhoPolicy::Fixed;
  cfg.rho_hat = rho_hat;
  if (mode == "global")
    cfg.mode = priors::Mode::Global;
  else if (mode == "local")
    cfg.mode = priors::Mode::Local;
  else
    throw ValidationError("unknown mode '" + mode +
                          "' (expected global or local)");
  return cfg;
}

PriorClusterSet load_priors(const std::string& priors_path,
                            const std::string& edges_path) {
  if (!priors_path.empty() && !edges_path.empty())
    throw ValidationError("give prior clusters either as modules or as edges");
  if (!priors_path.empty()) return io::read_priors(priors_path);
  auto edges = io::read_edges(edges_path);
  std::vector<GeneId> genes;
  std::unordered_set<GeneId> seen;
  for (const auto& [a, b] : edges) {
    if (seen.insert(a).second) genes.push_back(a);
    if (seen.insert(b).second) genes.push_back(b);
  }
  return priors::communities_from_edges(genes, edges);
}

void write_evaluation(std::ostream& out, const evalkit::ConfusionCounts& c,
                      const evalkit::Prf& prf) {
  out << "tp\tfp\ttn\tfn\tprecision\trecall\tf\n"
      << c.tp << '\t' << c.fp << '\t' << c.tn << '\t' << c.fn << '\t'
      << io::format_real_12(prf.precision) << '\t'
      << io::format_real_12(prf.recall) << '\t' << io::format_real_12(prf.f)
      << '\n';
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (const char* threads = std::getenv("MODCLUST_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) omp_set_num_threads(t);
  }
#endif

  CLI::App app{"modclust: module detection in gene interaction networks"};
  app.set_version_flag("--version", std::string("modclust ") +
                                        pipeline::kVersion);
  app.require_subcommand(1);

  // ---- correlate ----
  std::string co_expr, co_metric = "pcc", co_disc = "freq", co_bins = "auto",
              co_out;
  bool co_rows = false;
  auto* co = app.add_subcommand("correlate",
                                "Build a standardized correlation matrix");
  co->add_option("--expr", co_expr, "expression TSV")->required();
  co->add_flag("--samples-as-rows", co_rows,
               "expression file has one sample per row");
  co->add_option("--metric", co_metric, "pcc|dcc|mi1|mi2|mi3");
  co->add_option("--discretization", co_disc, "width|freq (MI only)");
  co->add_option("--bins", co_bins, "'auto' or bin count (MI only)");
  co->add_option("--out", co_out, "output matrix TSV")->required();
  co->callback([&] {
    auto expr = io::read_expression(co_expr, co_rows);
    auto cfg = make_metric_config(co_metric, co_disc, co_bins);
    io::write_matrix(co_out, corrmat::build_correlation_matrix(expr, cfg));
  });

  // ---- supervise ----
  std::string su_matrix, su_priors, su_edges, su_mode = "global", su_out,
              su_outdir;
  double su_rho = 0.25;
  bool su_certain = false, su_off = false;
  auto* su = app.add_subcommand(
      "supervise", "Magnify prior-cluster blocks of a correlation matrix");
  su->add_option("--matrix", su_matrix, "correlation matrix TSV")->required();
  su->add_option("--priors", su_priors, "prior clusters (module file)");
  su->add_option("--prior-edges", su_edges, "prior network (edge TSV)");
  su->add_option("--rho-hat", su_rho, "reliability in [0,1]; 0 = certain");
  su->add_flag("--certain", su_certain, "treat priors as certain (rho-hat 0)");
  su->add_flag("--off", su_off, "disable magnification (rho-hat 1)");
  su->add_option("--mode", su_mode, "global|local");
  su->add_option("--out", su_out, "output matrix TSV (global mode)");
  su->add_option("--outdir", su_outdir, "output directory (local mode)");
  su->callback([&] {
    if (su_priors.empty() && su_edges.empty())
      throw ValidationError("supervise needs --priors or --prior-edges");
    auto matrix = io::read_matrix(su_matrix);
    auto cfg = make_supervision_config(su_rho, su_certain, su_off, su_mode);
    auto prior_set = load_priors(su_priors, su_edges);
    if (cfg.mode == priors::Mode::Global) {
      if (su_out.empty()) throw ValidationError("global mode needs --out");
      io::write_matrix(su_out,
                       priors::incorporate_global(matrix, prior_set, cfg));
      return;
    }
    if (su_outdir.empty()) throw ValidationError("local mode needs --outdir");
    std::filesystem::create_directories(su_outdir);
    auto per_cluster = priors::incorporate_local(matrix, prior_set, cfg);
    std::unordered_set<std::string> used;
    for (const auto& [name, updated] : per_cluster) {
      std::string base = io::sanitize_component(name);
      while (!used.insert(base).second) base += "_";
      io::write_matrix(su_outdir + "/" + base + ".tsv", updated);
    }
  });

  // ---- deconvolve ----
  std::string de_matrix, de_out, de_scaling = "auto";
  double de_delta = 0.95;
  auto* de = app.add_subcommand("deconvolve",
                                "Extract direct correlations from a matrix");
  de->add_option("--matrix", de_matrix, "correlation matrix TSV")->required();
  de->add_option("--delta", de_delta, "direct-eigenvalue bound in (0,1)");
  de->add_option("--scaling", de_scaling, "auto|none");
  de->add_option("--out", de_out, "output matrix TSV")->required();
  de->callback([&] {
    deconv::DeconvConfig cfg;
    cfg.delta = de_delta;
    if (de_scaling == "auto")
      cfg.scaling = deconv::Scaling::Auto;
    else if (de_scaling == "none")
      cfg.scaling = deconv::Scaling::None;
    else
      throw ValidationError("unknown scaling '" + de_scaling +
                            "' (expected auto or none)");
    io::write_matrix(de_out, deconv::deconvolve(io::read_matrix(de_matrix), cfg));
  });

  // ---- cluster ----
  std::string cl_matrix, cl_out;
  auto* cl = app.add_subcommand("cluster",
                                "Single-linkage dendrogram from a matrix");
  cl->add_option("--matrix", cl_matrix, "correlation matrix TSV")->required();
  cl->add_option("--out", cl_out, "output dendrogram")->required();
  cl->callback([&] {
    io::write_dendrogram(cl_out, hac::single_linkage(io::read_matrix(cl_matrix)));
  });

  // ---- cut ----
  std::string cu_tree, cu_out;
  double cu_eps = 0.0;
  auto* cu = app.add_subcommand("cut", "Flat modules at a similarity threshold");
  cu->add_option("--dendrogram", cu_tree, "dendrogram file")->required();
  cu->add_option("--epsilon", cu_eps, "similarity threshold in [0,1]")
      ->required();
  cu->add_option("--out", cu_out, "output module TSV")->required();
  cu->callback([&] {
    io::write_modules(cu_out, hac::cut(io::read_dendrogram(cu_tree), cu_eps));
  });

  // ---- sweep ----
  std::string sw_tree, sw_out;
  double sw_step = 0.01;
  auto* sw = app.add_subcommand("sweep",
                                "Materialize cuts over the threshold range");
  sw->add_option("--dendrogram", sw_tree, "dendrogram file")->required();
  sw->add_option("--step", sw_step, "threshold increment");
  sw->add_option("--out", sw_out, "output summary TSV")->required();
  sw->callback([&] {
    auto tree = io::read_dendrogram(sw_tree);
    auto points = hac::threshold_sweep(tree, sw_step);
    std::ofstream out(sw_out, std::ios::binary | std::ios::trunc);
    if (!out) throw InputFormatError("cannot open '" + sw_out + "' for writing");
    out << "eps\tn_modules\tlargest_module\n";
    for (const auto& p : points) {
      std::size_t largest = 0;
      for (const auto& mod : p.modules.modules())
        largest = std::max(largest, mod.members.size());
      out << io::format_real_12(p.eps) << '\t' << p.modules.size() << '\t'
          << largest << '\n';
    }
    out.flush();
    if (!out) throw InputFormatError("write to '" + sw_out + "' failed");
  });

  // ---- evaluate ----
  std::string ev_pred, ev_gold, ev_out;
  auto* ev = app.add_subcommand("evaluate",
                                "Pairwise confusion against a gold standard");
  ev->add_option("--pred", ev_pred, "predicted module TSV")->required();
  ev->add_option("--gold", ev_gold, "gold module TSV")->required();
  ev->add_option("--out", ev_out, "output TSV (default stdout)");
  ev->callback([&] {
    auto counts =
        evalkit::pair_confusion(io::read_modules(ev_pred), io::read_modules(ev_gold));
    auto prf = evalkit::precision_recall_f(counts);
    if (ev_out.empty()) {
      write_evaluation(std::cout, counts, prf);
      return;
    }
    std::ofstream out(ev_out, std::ios::binary | std::ios::trunc);
    if (!out) throw InputFormatError("cannot open '" + ev_out + "' for writing");
    write_evaluation(out, counts, prf);
    out.flush();
    if (!out) throw InputFormatError("write to '" + ev_out + "' failed");
  });

  // ---- metagene ----
  std::string mg_expr, mg_out_expr, mg_out_map;
  double mg_tau = 0.95;
  bool mg_rows = false;
  auto* mg = app.add_subcommand("metagene",
                                "Merge near-duplicate expression profiles");
  mg->add_option("--expr", mg_expr, "expression TSV")->required();
  mg->add_flag("--samples-as-rows", mg_rows,
               "expression file has one sample per row");
  mg->add_option("--tau", mg_tau, "merge threshold in (0,1]");
  mg->add_option("--out-expr", mg_out_expr, "merged expression TSV")
      ->required();
  mg->add_option("--out-map", mg_out_map, "metagene membership TSV")
      ->required();
  mg->callback([&] {
    auto [merged, map] =
        metagene::merge_metagenes(io::read_expression(mg_expr, mg_rows), mg_tau);
    io::write_expression(mg_out_expr, merged);
    std::ofstream out(mg_out_map, std::ios::binary | std::ios::trunc);
    if (!out)
      throw InputFormatError("cannot open '" + mg_out_map + "' for writing");
    for (const auto& entry : map.entries)
      for (const auto& member : entry.members)
        out << entry.id << '\t' << member << '\n';
    out.flush();
    if (!out) throw InputFormatError("write to '" + mg_out_map + "' failed");
  });

  // ---- synth ----
  synthbench::BenchConfig bench;
  std::string sy_outdir;
  auto* sy = app.add_subcommand("synth",
                                "Generate a seeded synthetic benchmark");
  sy->add_option("--genes", bench.n_genes, "gene count");
  sy->add_option("--modules", bench.n_modules, "module count");
  sy->add_option("--samples", bench.m_samples, "sample count");
  sy->add_option("--sigma", bench.sigma, "profile noise level");
  sy->add_option("--p-corrupt", bench.p_corrupt, "prior corruption rate");
  sy->add_option("--coupling", bench.latent_coupling,
                 "correlation between consecutive module activities");
  sy->add_option("--loading-lo", bench.loading_lo, "smallest latent loading");
  sy->add_option("--loading-hi", bench.loading_hi, "largest latent loading");
  sy->add_option("--seed", bench.seed, "RNG seed");
  sy->add_option("--outdir", sy_outdir, "output directory")->required();
  sy->callback([&] {
    auto b = synthbench::generate_benchmark(bench);
    std::filesystem::create_directories(sy_outdir);
    io::write_expression(sy_outdir + "/expr.tsv", b.expr);
    io::write_modules(sy_outdir + "/truth.gmt", b.truth);
    io::write_priors(sy_outdir + "/priors.gmt", b.priors);
    std::ofstream out(sy_outdir + "/edges.tsv",
                      std::ios::binary | std::ios::trunc);
    if (!out)
      throw InputFormatError("cannot open '" + sy_outdir +
                             "/edges.tsv' for writing");
    for (const auto& [reg, tgt] : b.edges) out << reg << '\t' << tgt << '\n';
    out.flush();
    if (!out) throw InputFormatError("write to '" + sy_outdir + "/edges.tsv' failed");
  });

  // ---- derive-gold ----
  std::string dg_edges, dg_kind = "minimal", dg_out;
  auto* dg = app.add_subcommand(
      "derive-gold", "Gold-standard modules from a regulatory network");
  dg->add_option("--edges", dg_edges, "regulator-target edge TSV")->required();
  dg->add_option("--kind", dg_kind, "minimal|strict");
  dg->add_option("--out", dg_out, "output module TSV")->required();
  dg->callback([&] {
    auto edges = io::read_edges(dg_edges);
    if (dg_kind == "minimal")
      io::write_modules(dg_out, evalkit::minimal_modules(edges));
    else if (dg_kind == "strict")
      io::write_modules(dg_out, evalkit::strict_modules(edges));
    else
      throw ValidationError("unknown kind '" + dg_kind +
                            "' (expected minimal or strict)");
  });

  // ---- run ----
  pipeline::RunConfig run;
  std::string ru_metric = "pcc", ru_disc = "freq", ru_bins = "auto",
              ru_mode = "global";
  double ru_rho = 0.25, ru_eps = -1.0;
  bool ru_certain = false, ru_off = false;
  auto* ru = app.add_subcommand("run", "Full detection pipeline");
  ru->add_option("--expr", run.expr_path, "expression TSV")->required();
  ru->add_flag("--samples-as-rows", run.samples_as_rows,
               "expression file has one sample per row");
  ru->add_option("--metric", ru_metric, "pcc|dcc|mi1|mi2|mi3");
  ru->add_option("--discretization", ru_disc, "width|freq (MI only)");
  ru->add_option("--bins", ru_bins, "'auto' or bin count (MI only)");
  ru->add_flag("--metagene", run.metagene, "merge near-duplicate profiles first");
  ru->add_option("--metagene-tau", run.metagene_tau, "merge threshold");
  ru->add_option("--prior", run.priors_path, "prior clusters (module file)");
  ru->add_option("--prior-edges", run.prior_edges_path,
                 "prior network (edge TSV)");
  ru->add_option("--rho-hat", ru_rho, "reliability in [0,1]");
  ru->add_flag("--certain", ru_certain, "treat priors as certain");
  ru->add_flag("--off", ru_off, "disable magnification");
  ru->add_option("--mode", ru_mode, "global|local");
  ru->add_flag("--deconvolve", run.deconvolve, "deconvolve before clustering");
  ru->add_option("--delta", run.deconv.delta, "direct-eigenvalue bound");
  ru->add_option("--gold", run.gold_path, "gold standard (module file)");
  ru->add_option("--step", run.step, "sweep increment");
  ru->add_option("--epsilon", ru_eps,
                 "fixed cut threshold when no gold standard is given");
  ru->add_option("--outdir", run.outdir, "output directory")->required();
  ru->callback([&] {
    run.metric = make_metric_config(ru_metric, ru_disc, ru_bins);
    run.supervision =
        make_supervision_config(ru_rho, ru_certain, ru_off, ru_mode);
    if (ru_eps >= 0.0) run.epsilon = ru_eps;
    pipeline::run_pipeline(run);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "[modclust] error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "[modclust] error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
