#pragma once
// Seeded synthetic benchmark: modular ground truth, latent-factor expression
// profiles, a one-regulator-per-module edge set, and optionally corrupted
// prior clusters.  Identical configs produce bit-identical artifacts.

#include <cstdint>
#include <utility>
#include <vector>

#include "modclust/core.hpp"

namespace modclust::synthbench {

struct BenchConfig {
  int n_genes = 100;
  int n_modules = 5;
  int m_samples = 40;
  double loading_lo = 0.5;
  double loading_hi = 1.5;
  double sigma = 0.35;
  double p_corrupt = 0.0;
  // Correlation between consecutive module activity profiles; 0 keeps the
  // latents independent.
  double latent_coupling = 0.0;
  std::uint64_t seed = 1;
};

struct Benchmark {
  ExpressionMatrix expr;
  ModuleSet truth;
  std::vector<std::pair<GeneId, GeneId>> edges;  // regulator -> target
  PriorClusterSet priors;
};

// Genes are split into near-equal consecutive modules; each gene profile is
// loading * module latent + sigma * noise.  Priors start as the truth with a
// p_corrupt fraction of genes swapped across module slots.
Benchmark generate_benchmark(const BenchConfig& cfg);

}  // namespace modclust::synthbench
