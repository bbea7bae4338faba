#include "modclust/synthbench.hpp"

#include <cmath>
#include <random>
#include <string>

namespace modclust::synthbench {

namespace {

// Gaussian draws with an explicit Box-Muller so the stream does not depend
// on the standard library's distribution internals.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0,1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0,1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

void check_config(const BenchConfig& cfg) {
  if (cfg.n_modules < 2)
    throw ValidationError("benchmark needs at least 2 modules");
  if (cfg.n_genes < 2 * cfg.n_modules)
    throw ValidationError("benchmark needs at least 2 genes per module: " +
                          std::to_string(cfg.n_genes) + " genes for " +
                          std::to_string(cfg.n_modules) + " modules");
  if (cfg.m_samples < 10)
    throw ValidationError("benchmark needs at least 10 samples");
  if (!(cfg.sigma >= 0.0))
    throw ValidationError("sigma must be non-negative");
  if (!(cfg.p_corrupt >= 0.0 && cfg.p_corrupt <= 1.0))
    throw ValidationError("p_corrupt must be in [0,1]");
  if (!(cfg.latent_coupling >= 0.0 && cfg.latent_coupling < 1.0))
    throw ValidationError("latent_coupling must be in [0,1)");
  if (!(cfg.loading_lo > 0.0 && cfg.loading_lo <= cfg.loading_hi))
    throw ValidationError("loading range must satisfy 0 < lo <= hi");
}

std::string padded(const std::string& prefix, int value, int width) {
  std::string digits = std::to_string(value);
  while (static_cast<int>(digits.size()) < width) digits.insert(0, 1, '0');
  return prefix + digits;
}

}  // namespace

Benchmark generate_benchmark(const BenchConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  const int n = cfg.n_genes;
  const int k = cfg.n_modules;
  const int m = cfg.m_samples;
  const int width = static_cast<int>(std::to_string(n).size());

  std::vector<int> module_of(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  {
    const int base = n / k, rem = n % k;
    int gene = 0;
    for (int j = 0; j < k; ++j) {
      const int size = base + (j < rem ? 1 : 0);
      for (int s = 0; s < size; ++s, ++gene) {
        module_of[static_cast<std::size_t>(gene)] = j;
        members[static_cast<std::size_t>(j)].push_back(gene);
      }
    }
  }

  std::vector<GeneId> genes;
  for (int i = 0; i < n; ++i) genes.push_back(padded("G", i + 1, width));
  std::vector<std::string> samples;
  for (int s = 0; s < m; ++s) samples.push_back("s" + std::to_string(s + 1));

  // Module latents; consecutive modules share latent_coupling correlation.
  const double c = cfg.latent_coupling;
  const double fresh_scale = std::sqrt(1.0 - c * c);
  Eigen::MatrixXd latents(k, m);
  for (int j = 0; j < k; ++j)
    for (int s = 0; s < m; ++s) {
      const double draw = rng.gauss();
      latents(j, s) = j == 0 ? draw
                             : c * latents(j - 1, s) + fresh_scale * draw;
    }

  Eigen::MatrixXd values(n, m);
  for (int i = 0; i < n; ++i) {
    const double loading =
        cfg.loading_lo + rng.uniform() * (cfg.loading_hi - cfg.loading_lo);
    const int j = module_of[static_cast<std::size_t>(i)];
    for (int s = 0; s < m; ++s) {
      const double noise = rng.gauss();
      values(i, s) = loading * latents(j, s) + cfg.sigma * noise;
    }
  }

  std::vector<std::pair<GeneId, GeneId>> edges;
  std::vector<Module> truth_modules;
  for (int j = 0; j < k; ++j) {
    const std::string regulator = "R" + std::to_string(j + 1);
    Module mod;
    mod.id = "M" + std::to_string(j + 1);
    for (int gene : members[static_cast<std::size_t>(j)]) {
      edges.emplace_back(regulator, genes[static_cast<std::size_t>(gene)]);
      mod.members.push_back(genes[static_cast<std::size_t>(gene)]);
    }
    truth_modules.push_back(std::move(mod));
  }

  // Corruption: permute the occupants of the marked slots so module sizes
  // never change.
  std::vector<std::vector<GeneId>> prior_members(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    prior_members[static_cast<std::size_t>(j)] =
        truth_modules[static_cast<std::size_t>(j)].members;
  std::vector<std::pair<int, int>> slots;  // (module, position)
  for (int j = 0; j < k; ++j)
    for (std::size_t pos = 0;
         pos < prior_members[static_cast<std::size_t>(j)].size(); ++pos)
      if (rng.uniform() < cfg.p_corrupt)
        slots.emplace_back(j, static_cast<int>(pos));
  if (slots.size() >= 2) {
    std::vector<GeneId> occupants;
    for (const auto& [j, pos] : slots)
      occupants.push_back(
          prior_members[static_cast<std::size_t>(j)][static_cast<std::size_t>(pos)]);
    for (std::size_t i = occupants.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() *
                                              static_cast<double>(i + 1));
      std::swap(occupants[i], occupants[j > i ? i : j]);
    }
    for (std::size_t s = 0; s < slots.size(); ++s)
      prior_members[static_cast<std::size_t>(slots[s].first)]
                   [static_cast<std::size_t>(slots[s].second)] = occupants[s];
  }
  std::vector<PriorCluster> clusters;
  for (int j = 0; j < k; ++j)
    clusters.push_back(PriorCluster{
        "M" + std::to_string(j + 1),
        std::move(prior_members[static_cast<std::size_t>(j)])});

  return Benchmark{
      ExpressionMatrix(std::move(genes), std::move(samples), std::move(values)),
      ModuleSet(std::move(truth_modules), false),
      std::move(edges),
      PriorClusterSet(std::move(clusters))};
}

}  // namespace modclust::synthbench
