#include "modclust/metagene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modclust::metagene {

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
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] =
        std::min(a, b);
  }
};

}  // namespace

std::pair<ExpressionMatrix, MetageneMap> merge_metagenes(
    const ExpressionMatrix& expr, double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw ValidationError("metagene tau must be in (0,1], got " +
                          std::to_string(tau));
  const int n = static_cast<int>(expr.n_genes());
  const Eigen::Index m = expr.n_samples();

  // Centered rows and their squared norms; constant rows are flagged out.
  Eigen::MatrixXd centered(n, m);
  std::vector<double> sq(static_cast<std::size_t>(n));
  std::vector<char> constant(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const double mean = expr.values().row(i).mean();
    centered.row(i) = expr.values().row(i).array() - mean;
    sq[static_cast<std::size_t>(i)] = centered.row(i).squaredNorm();
    if (sq[static_cast<std::size_t>(i)] == 0.0) {
      constant[static_cast<std::size_t>(i)] = 1;
      warn("gene '" + expr.genes()[static_cast<std::size_t>(i)] +
           "' has a constant profile and is not merged");
    }
  }

  UnionFind uf(n);
  for (int i = 0; i < n; ++i) {
    if (constant[static_cast<std::size_t>(i)]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (constant[static_cast<std::size_t>(j)]) continue;
      const double r = centered.row(i).dot(centered.row(j)) /
                       std::sqrt(sq[static_cast<std::size_t>(i)] *
                                 sq[static_cast<std::size_t>(j)]);
      if (r > tau) uf.unite(i, j);
    }
  }

  std::vector<std::vector<int>> groups;
  std::vector<int> root_to_group(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int root = uf.find(i);
    int& g = root_to_group[static_cast<std::size_t>(root)];
    if (g == -1) {
      g = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(g)].push_back(i);
  }

  MetageneMap map;
  std::vector<GeneId> out_genes;
  Eigen::MatrixXd out_values(static_cast<Eigen::Index>(groups.size()), m);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    MetageneMap::Entry entry;
    entry.id = expr.genes()[static_cast<std::size_t>(groups[g].front())];
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(m);
    for (int idx : groups[g]) {
      entry.members.push_back(expr.genes()[static_cast<std::size_t>(idx)]);
      mean += expr.values().row(idx);
    }
    mean /= static_cast<double>(groups[g].size());
    out_values.row(static_cast<Eigen::Index>(g)) = mean;
    out_genes.push_back(entry.id);
    map.entries.push_back(std::move(entry));
  }
  return {ExpressionMatrix(std::move(out_genes), expr.samples(),
                           std::move(out_values)),
          std::move(map)};
}

}  // namespace modclust::metagene
