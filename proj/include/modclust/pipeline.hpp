#pragma once
// End-to-end orchestration: expression -> optional metagene merge ->
// correlation -> optional supervision -> optional deconvolution ->
// single linkage -> sweep -> optional evaluation, with deterministic
// file outputs and a reproducibility manifest.

#include <optional>
#include <string>
#include <vector>

#include "modclust/corrmat.hpp"
#include "modclust/core.hpp"
#include "modclust/deconv.hpp"
#include "modclust/priors.hpp"

namespace modclust::pipeline {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string expr_path;
  bool samples_as_rows = false;

  corrmat::MetricConfig metric;

  bool metagene = false;
  double metagene_tau = 0.95;

  std::string priors_path;       // module file; empty = none
  std::string prior_edges_path;  // edge file alternative
  priors::SupervisionConfig supervision;

  bool deconvolve = false;
  deconv::DeconvConfig deconv;

  std::string gold_path;  // empty = no evaluation
  double step = 0.01;
  std::optional<double> epsilon;  // fixed cut when not evaluating

  std::string outdir;
};

struct RunReport {
  std::vector<std::string> outputs;  // paths relative to outdir
};

// Writes into cfg.outdir (created if missing): dendrogram.txt plus, with a
// gold standard, roc.tsv / metrics.tsv / modules.tsv (best-F cut) /
// modules_knee.tsv / largest_module.tsv; with --epsilon, modules.tsv; and
// otherwise sweep_summary.tsv.  Local supervision writes one subdirectory
// per prior cluster.  manifest.tsv records the configuration and input
// digests.  Partial outputs are removed when a stage fails.
RunReport run_pipeline(const RunConfig& cfg);

}  // namespace modclust::pipeline
