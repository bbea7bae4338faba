#include "modclust/priors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace modclust::priors {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(b)] = a;
  }
};

double resolve_rho_hat(const SupervisionConfig& cfg) {
  switch (cfg.policy) {
    case RhoPolicy::Certain: return 0.0;
    case RhoPolicy::Off: return 1.0;
    case RhoPolicy::Fixed:
      if (!(cfg.rho_hat >= 0.0 && cfg.rho_hat <= 1.0))
        throw ValidationError("rho_hat must be in [0,1], got " +
                              std::to_string(cfg.rho_hat));
      return cfg.rho_hat;
  }
  return 1.0;
}

// Cluster members present in D, in cluster order; warns about the rest.
std::vector<Eigen::Index> restrict_members(const CorrelationMatrix& D,
                                           const PriorCluster& cluster) {
  std::vector<Eigen::Index> idx;
  std::size_t dropped = 0;
  for (const auto& g : cluster.members) {
    if (auto i = D.index_of(g))
      idx.push_back(*i);
    else
      ++dropped;
  }
  if (dropped > 0)
    warn("prior cluster '" + cluster.name + "': dropping " +
         std::to_string(dropped) + " gene(s) absent from the matrix");
  if (idx.size() < 2)
    throw EmptyPriorCluster("prior cluster '" + cluster.name +
                            "' keeps fewer than 2 genes after restriction");
  return idx;
}

// gamma = rho * d(C) rewritten through rho = 1 + rho_hat*(1/d - 1):
// gamma = d + rho_hat*(1 - d), with the endpoints pinned exactly.
double cluster_gamma(const CorrelationMatrix& D,
                     const std::vector<Eigen::Index>& idx,
                     const std::string& name, double rho_hat) {
  double d = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      d = std::max(d, D.values()(idx[a], idx[b]));
  if (d <= 0.0)
    throw DegeneratePriorBlock("prior cluster '" + name +
                               "' has an all-zero off-diagonal block");
  if (rho_hat == 0.0) return d;
  if (rho_hat == 1.0) return 1.0;
  return d + rho_hat * (1.0 - d);
}

}  // namespace

PriorClusterSet communities_from_edges(
    const std::vector<GeneId>& genes,
    const std::vector<std::pair<GeneId, GeneId>>& edges) {
  std::unordered_map<GeneId, int> index;
  for (const auto& g : genes) {
    if (!valid_gene_id(g)) throw ValidationError("bad gene id '" + g + "'");
    index.emplace(g, static_cast<int>(index.size()));
  }
  UnionFind uf(static_cast<int>(index.size()));
  for (const auto& [a, b] : edges) {
    auto ia = index.find(a);
    auto ib = index.find(b);
    if (ia == index.end())
      throw UnknownGene("edge references unknown gene '" + a + "'");
    if (ib == index.end())
      throw UnknownGene("edge references unknown gene '" + b + "'");
    uf.unite(ia->second, ib->second);
  }
  std::map<int, std::vector<GeneId>> components;
  for (const auto& g : genes)
    components[uf.find(index.at(g))].push_back(g);

  std::vector<PriorCluster> clusters;
  for (auto& [root, members] : components) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    clusters.push_back(PriorCluster{members.front(), std::move(members)});
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const PriorCluster& a, const PriorCluster& b) {
              return a.name < b.name;
            });
  return PriorClusterSet(std::move(clusters));
}

CorrelationMatrix magnify_cluster(const CorrelationMatrix& D,
                                  const PriorCluster& cluster,
                                  const SupervisionConfig& cfg) {
  const double rho_hat = resolve_rho_hat(cfg);
  const auto idx = restrict_members(D, cluster);
  const double gamma = cluster_gamma(D, idx, cluster.name, rho_hat);

  Eigen::MatrixXd values = D.values();
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b)
      if (idx[a] != idx[b]) values(idx[a], idx[b]) /= gamma;

  MatrixMeta meta = D.meta();
  meta.supervised = true;
  return CorrelationMatrix(D.genes(), std::move(values), meta);
}

CorrelationMatrix incorporate_global(const CorrelationMatrix& D,
                                     const PriorClusterSet& priors,
                                     const SupervisionConfig& cfg) {
  const double rho_hat = resolve_rho_hat(cfg);
  const Eigen::Index n = D.size();
  Eigen::MatrixXd divisor = Eigen::MatrixXd::Ones(n, n);
  for (const auto& cluster : priors.clusters()) {
    const auto idx = restrict_members(D, cluster);
    const double gamma = cluster_gamma(D, idx, cluster.name, rho_hat);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b)
        if (idx[a] != idx[b])
          divisor(idx[a], idx[b]) = std::min(divisor(idx[a], idx[b]), gamma);
  }
  Eigen::MatrixXd values = D.values();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) values(i, j) /= divisor(i, j);

  MatrixMeta meta = D.meta();
  meta.supervised = meta.supervised || !priors.empty();
  return CorrelationMatrix(D.genes(), std::move(values), meta);
}

std::vector<std::pair<std::string, CorrelationMatrix>> incorporate_local(
    const CorrelationMatrix& D, const PriorClusterSet& priors,
    const SupervisionConfig& cfg) {
  std::vector<std::pair<std::string, CorrelationMatrix>> out;
  out.reserve(priors.size());
  for (const auto& cluster : priors.clusters())
    out.emplace_back(cluster.name, magnify_cluster(D, cluster, cfg));
  return out;
}

}  // namespace modclust::priors
