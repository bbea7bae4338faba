#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "modclust/corrmat.hpp"
#include "modclust/hac.hpp"
#include "modclust/io.hpp"
#include "modclust/pipeline.hpp"
#include "oracles.hpp"
#include "tmpdir.hpp"

using namespace modclust;
using testutil::TmpDir;
using testutil::read_text;
namespace fs = std::filesystem;

namespace {

// Two clean modules over six samples; profiles are exact multiples of the
// module latent, so PCC separates them at any reasonable threshold.
ExpressionMatrix two_module_expression() {
  std::vector<GeneId> genes{"a1", "a2", "a3", "b1", "b2", "b3"};
  std::vector<std::string> samples{"s1", "s2", "s3", "s4", "s5", "s6"};
  Eigen::MatrixXd v(6, 6);
  const double u[6] = {1, 2, 3, 4, 5, 6};
  const double w[6] = {3, 1, 4, 1, 5, 9};
  for (int s = 0; s < 6; ++s) {
    v(0, s) = u[s];
    v(1, s) = 2 * u[s];
    v(2, s) = 0.5 * u[s];
    v(3, s) = w[s];
    v(4, s) = 3 * w[s];
    v(5, s) = 0.25 * w[s];
  }
  return ExpressionMatrix(std::move(genes), std::move(samples), std::move(v));
}

void write_gold(const std::string& path) {
  io::write_modules(path, ModuleSet({Module{"A", {"a1", "a2", "a3"}},
                                     Module{"B", {"b1", "b2", "b3"}}},
                                    false));
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    kv.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return kv;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + MODCLUST_BIN + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("a supervised deconvolved evaluated run emits the full output set") {
  TmpDir tmp("pipe_full");
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path, two_module_expression());
  const auto gold_path = tmp.file("gold.tsv");
  write_gold(gold_path);
  const auto priors_path = tmp.file("priors.tsv");
  io::write_priors(priors_path,
                   PriorClusterSet({PriorCluster{"pa", {"a1", "a2"}},
                                    PriorCluster{"pb", {"b1", "b2"}}}));

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::DCC;
  cfg.priors_path = priors_path;
  cfg.supervision.policy = priors::RhoPolicy::Fixed;
  cfg.supervision.rho_hat = 0.25;
  cfg.deconvolve = true;
  cfg.gold_path = gold_path;
  cfg.step = 0.05;
  cfg.outdir = tmp.file("out");
  auto report = pipeline::run_pipeline(cfg);

  const std::vector<std::string> expected{
      "dendrogram.txt",    "roc.tsv",     "metrics.tsv",   "modules.tsv",
      "modules_knee.tsv",  "largest_module.tsv", "manifest.tsv"};
  for (const auto& name : expected) {
    CAPTURE(name);
    CHECK(fs::exists(fs::path(cfg.outdir) / name));
    bool reported = false;
    for (const auto& rel : report.outputs) reported = reported || rel == name;
    CHECK(reported);
  }

  auto manifest = read_manifest(cfg.outdir + "/manifest.tsv");
  CHECK(manifest.at("tool") == "modclust");
  CHECK(manifest.at("version") == pipeline::kVersion);
  CHECK(manifest.at("metric") == "dcc");
  CHECK(manifest.at("supervision") == "global");
  CHECK(manifest.at("rho_hat") == "0.25");
  CHECK(manifest.at("deconvolve") == "1");
  CHECK(manifest.count("input.expression.digest") == 1);
  CHECK(manifest.count("input.priors.digest") == 1);
  CHECK(manifest.count("input.gold.digest") == 1);

  // the clean two-module structure survives supervision and deconvolution
  auto modules = io::read_modules(cfg.outdir + "/modules.tsv");
  CHECK(oracles::canonical(modules) ==
        oracles::canonical(io::read_modules(gold_path)));
  const auto curve = io::read_roc(cfg.outdir + "/roc.tsv");
  CHECK(curve.points.front().synthetic);
  CHECK(curve.points.back().synthetic);
}

TEST_CASE("a plain run reduces to correlate plus cluster") {
  TmpDir tmp("pipe_plain");
  const auto expr_path = tmp.file("expr.tsv");
  auto expr = two_module_expression();
  io::write_expression(expr_path, expr);

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::PCC;
  cfg.step = 0.1;
  cfg.outdir = tmp.file("out");
  auto report = pipeline::run_pipeline(cfg);
  CHECK(report.outputs.size() == 3);  // dendrogram, sweep summary, manifest
  CHECK(fs::exists(fs::path(cfg.outdir) / "sweep_summary.tsv"));
  CHECK_FALSE(fs::exists(fs::path(cfg.outdir) / "modules.tsv"));

  auto direct = hac::single_linkage(
      corrmat::build_correlation_matrix(expr, cfg.metric));
  const auto reference = tmp.file("reference_dendrogram.txt");
  io::write_dendrogram(reference, direct);
  CHECK(read_text(cfg.outdir + "/dendrogram.txt") ==
        read_text(reference));

  auto manifest = read_manifest(cfg.outdir + "/manifest.tsv");
  CHECK(manifest.at("supervision") == "none");
  CHECK(manifest.at("deconvolve") == "0");
}

TEST_CASE("identical runs produce byte-identical output trees") {
  TmpDir tmp("pipe_repro");
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path, two_module_expression());
  const auto gold_path = tmp.file("gold.tsv");
  write_gold(gold_path);

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::PCC;
  cfg.gold_path = gold_path;
  cfg.deconvolve = true;
  cfg.step = 0.02;

  cfg.outdir = tmp.file("run1");
  auto first = pipeline::run_pipeline(cfg);
  cfg.outdir = tmp.file("run2");
  auto second = pipeline::run_pipeline(cfg);
  REQUIRE(first.outputs == second.outputs);
  for (const auto& rel : first.outputs) {
    CAPTURE(rel);
    CHECK(read_text(tmp.file("run1") + "/" + rel) ==
          read_text(tmp.file("run2") + "/" + rel));
  }
}

TEST_CASE("a failing stage cleans up partial outputs") {
  TmpDir tmp("pipe_cleanup");
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path, two_module_expression());
  // gold shares no genes with the expression: evaluation must fail after
  // the dendrogram is already on disk
  const auto gold_path = tmp.file("gold.tsv");
  io::write_modules(gold_path,
                    ModuleSet({Module{"Z", {"z1", "z2"}}}, false));

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::PCC;
  cfg.gold_path = gold_path;
  cfg.outdir = tmp.file("out");
  CHECK_THROWS_AS(pipeline::run_pipeline(cfg), Error);
  CHECK(fs::exists(cfg.outdir));
  CHECK(fs::is_empty(cfg.outdir));
}

TEST_CASE("stage failures keep their category and name the stage") {
  TmpDir tmp("pipe_stageerr");
  pipeline::RunConfig cfg;
  cfg.expr_path = tmp.file("missing.tsv");
  cfg.outdir = tmp.file("out");
  try {
    pipeline::run_pipeline(cfg);
    REQUIRE(false);
  } catch (const Error& e) {
    CHECK(e.exit_code() == 2);
    CHECK(std::string(e.what()).find("read-expression") != std::string::npos);
  }
}

TEST_CASE("local supervision writes one subdirectory per prior cluster") {
  TmpDir tmp("pipe_local");
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path, two_module_expression());
  const auto priors_path = tmp.file("priors.tsv");
  io::write_priors(priors_path,
                   PriorClusterSet({PriorCluster{"c one", {"a1", "a2"}},
                                    PriorCluster{"c/two", {"b1", "b2"}}}));

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::PCC;
  cfg.priors_path = priors_path;
  cfg.supervision.mode = priors::Mode::Local;
  cfg.supervision.policy = priors::RhoPolicy::Fixed;
  cfg.supervision.rho_hat = 0.5;
  cfg.epsilon = 0.6;
  cfg.outdir = tmp.file("out");
  auto report = pipeline::run_pipeline(cfg);

  CHECK(fs::exists(fs::path(cfg.outdir) / "c_one" / "dendrogram.txt"));
  CHECK(fs::exists(fs::path(cfg.outdir) / "c_one" / "modules.tsv"));
  CHECK(fs::exists(fs::path(cfg.outdir) / "c_two" / "dendrogram.txt"));
  CHECK(fs::exists(fs::path(cfg.outdir) / "c_two" / "modules.tsv"));
  bool saw_sub = false;
  for (const auto& rel : report.outputs)
    saw_sub = saw_sub || rel == "c_one/modules.tsv";
  CHECK(saw_sub);
  auto manifest = read_manifest(cfg.outdir + "/manifest.tsv");
  CHECK(manifest.at("supervision") == "local");
}

TEST_CASE("a fixed epsilon cuts without a gold standard") {
  TmpDir tmp("pipe_eps");
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path, two_module_expression());

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::PCC;
  cfg.epsilon = 0.9;
  cfg.outdir = tmp.file("out");
  pipeline::run_pipeline(cfg);
  CHECK(fs::exists(fs::path(cfg.outdir) / "modules.tsv"));
  CHECK_FALSE(fs::exists(fs::path(cfg.outdir) / "sweep_summary.tsv"));
  CHECK_FALSE(fs::exists(fs::path(cfg.outdir) / "roc.tsv"));
  auto modules = io::read_modules(cfg.outdir + "/modules.tsv");
  CHECK(oracles::canonical(modules) ==
        oracles::canonical(std::vector<std::vector<std::string>>{
            {"a1", "a2", "a3"}, {"b1", "b2", "b3"}}));
}

TEST_CASE("metagene merging folds duplicate profiles before clustering") {
  TmpDir tmp("pipe_meta");
  // a2 duplicates a1 exactly; the metagene pass must fold them
  std::vector<GeneId> genes{"a1", "a2", "b1"};
  std::vector<std::string> samples{"s1", "s2", "s3", "s4"};
  Eigen::MatrixXd v(3, 4);
  v << 1, 2, 3, 4, 1, 2, 3, 4, 5, 1, 4, 2;
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path,
                       ExpressionMatrix(std::move(genes), std::move(samples),
                                        std::move(v)));

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::PCC;
  cfg.metagene = true;
  cfg.metagene_tau = 0.99;
  cfg.epsilon = 0.5;
  cfg.outdir = tmp.file("out");
  auto report = pipeline::run_pipeline(cfg);
  bool has_map = false;
  for (const auto& rel : report.outputs)
    has_map = has_map || rel == "metagene_map.tsv";
  CHECK(has_map);
  const auto map_text = read_text(cfg.outdir + "/metagene_map.tsv");
  CHECK(map_text.find("a1\ta2") != std::string::npos);
}

TEST_CASE("the pipeline rejects contradictory prior sources") {
  pipeline::RunConfig cfg;
  cfg.expr_path = "x.tsv";
  cfg.priors_path = "p.tsv";
  cfg.prior_edges_path = "e.tsv";
  cfg.outdir = "out";
  CHECK_THROWS_AS(pipeline::run_pipeline(cfg), ValidationError);
  pipeline::RunConfig no_out;
  no_out.expr_path = "x.tsv";
  CHECK_THROWS_AS(pipeline::run_pipeline(no_out), ValidationError);
}

TEST_CASE("cli: version and argument errors") {
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("") == 2);                  // missing subcommand
  CHECK(run_cli("correlate") == 2);         // missing required options
  CHECK(run_cli("nonsense") == 2);
}

TEST_CASE("cli: correlate, cluster, cut, and evaluate round trip") {
  TmpDir tmp("cli_round");
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path, two_module_expression());
  const auto gold_path = tmp.file("gold.tsv");
  write_gold(gold_path);
  const auto corr = tmp.file("corr.tsv");
  const auto tree = tmp.file("dendro.txt");
  const auto mods = tmp.file("modules.tsv");
  const auto eval = tmp.file("eval.tsv");

  CHECK(run_cli("correlate --expr " + expr_path + " --metric pcc --out " +
                corr) == 0);
  CHECK(run_cli("cluster --matrix " + corr + " --out " + tree) == 0);
  CHECK(run_cli("cut --dendrogram " + tree + " --epsilon 0.9 --out " + mods) ==
        0);
  CHECK(run_cli("evaluate --pred " + mods + " --gold " + gold_path +
                " --out " + eval) == 0);

  const auto text = read_text(eval);
  CHECK(text.find("tp\tfp\ttn\tfn") != std::string::npos);
  // perfect recovery: 6 within-pairs, 9 cross-pairs, F = 1
  CHECK(text.find("6\t0\t9\t0\t1\t1\t1") != std::string::npos);
}

TEST_CASE("cli: run subcommand matches the library pipeline byte for byte") {
  TmpDir tmp("cli_run");
  const auto expr_path = tmp.file("expr.tsv");
  io::write_expression(expr_path, two_module_expression());
  const auto gold_path = tmp.file("gold.tsv");
  write_gold(gold_path);

  CHECK(run_cli("run --expr " + expr_path + " --metric pcc --gold " +
                gold_path + " --step 0.05 --outdir " + tmp.file("cli_out")) ==
        0);

  pipeline::RunConfig cfg;
  cfg.expr_path = expr_path;
  cfg.metric.metric = MetricTag::PCC;
  cfg.gold_path = gold_path;
  cfg.step = 0.05;
  cfg.outdir = tmp.file("lib_out");
  auto report = pipeline::run_pipeline(cfg);
  for (const auto& rel : report.outputs) {
    CAPTURE(rel);
    CHECK(read_text(tmp.file("cli_out") + "/" + rel) ==
          read_text(tmp.file("lib_out") + "/" + rel));
  }
}

TEST_CASE("cli: error exit codes by category") {
  TmpDir tmp("cli_codes");
  // input error: file does not exist
  CHECK(run_cli("cluster --matrix " + tmp.file("nope.tsv") + " --out " +
                tmp.file("t.txt")) == 2);

  // numeric error: deconvolution shift becomes singular without scaling
  const auto bad = tmp.file("bad.tsv");
  io::write_matrix(
      bad, CorrelationMatrix({"a", "b"},
                             (Eigen::MatrixXd(2, 2) << 1, 1, 1, 1).finished(),
                             MatrixMeta{}));
  CHECK(run_cli("deconvolve --matrix " + bad + " --scaling none --out " +
                tmp.file("d.tsv")) == 3);

  // degenerate input: prediction and gold share no genes
  const auto pred = tmp.file("pred.tsv");
  const auto gold = tmp.file("gold.tsv");
  io::write_modules(pred, ModuleSet({Module{"P", {"a", "b"}}}, false));
  io::write_modules(gold, ModuleSet({Module{"G", {"x", "y"}}}, false));
  CHECK(run_cli("evaluate --pred " + pred + " --gold " + gold) == 4);
}

TEST_CASE("cli: synth artifacts reload cleanly and rebuild the truth") {
  TmpDir tmp("cli_synth");
  const auto outdir = tmp.file("bench");
  CHECK(run_cli("synth --genes 20 --modules 4 --samples 12 --seed 7 "
                "--p-corrupt 0.3 --outdir " +
                outdir) == 0);
  auto expr = io::read_expression(outdir + "/expr.tsv", false);
  CHECK(expr.genes().size() == 20);
  CHECK(expr.samples().size() == 12);
  auto truth = io::read_modules(outdir + "/truth.gmt");
  CHECK(truth.size() == 4);
  auto priors = io::read_priors(outdir + "/priors.gmt");
  CHECK(priors.clusters().size() == 4);

  const auto derived = tmp.file("derived.tsv");
  CHECK(run_cli("derive-gold --edges " + outdir + "/edges.tsv" +
                " --kind strict --out " + derived) == 0);
  CHECK(oracles::canonical(io::read_modules(derived)) ==
        oracles::canonical(truth));
}
