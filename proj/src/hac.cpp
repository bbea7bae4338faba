#include "modclust/hac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace modclust::hac {

namespace {

struct MstEdge {
  double w;
  int i, j;  // i < j
};

// Prim from node 0; deterministic regardless of equal-weight choices since
// any MST yields the same sorted weight multiset and the same threshold
// components.
std::vector<MstEdge> minimum_spanning_tree(const Eigen::MatrixXd& values) {
  const int n = static_cast<int>(values.rows());
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  std::vector<double> best(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
  std::vector<int> from(static_cast<std::size_t>(n), 0);
  std::vector<MstEdge> edges;
  edges.reserve(static_cast<std::size_t>(n) - 1);

  in_tree[0] = 1;
  for (int v = 1; v < n; ++v) {
    best[static_cast<std::size_t>(v)] = 1.0 - values(0, v);
    from[static_cast<std::size_t>(v)] = 0;
  }
  for (int step = 1; step < n; ++step) {
    int pick = -1;
    for (int v = 0; v < n; ++v)
      if (!in_tree[static_cast<std::size_t>(v)] &&
          (pick == -1 ||
           best[static_cast<std::size_t>(v)] < best[static_cast<std::size_t>(pick)]))
        pick = v;
    in_tree[static_cast<std::size_t>(pick)] = 1;
    const int f = from[static_cast<std::size_t>(pick)];
    edges.push_back(MstEdge{best[static_cast<std::size_t>(pick)],
                            std::min(f, pick), std::max(f, pick)});
    for (int v = 0; v < n; ++v)
      if (!in_tree[static_cast<std::size_t>(v)]) {
        const double d = 1.0 - values(pick, v);
        if (d < best[static_cast<std::size_t>(v)]) {
          best[static_cast<std::size_t>(v)] = d;
          from[static_cast<std::size_t>(v)] = pick;
        }
      }
  }
  std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  return edges;
}

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
};

// Count of leading merges surviving a similarity threshold; shared by cut
// and sweep so both apply the identical comparison.
std::size_t kept_merges(const Dendrogram& tree, double epsilon) {
  const double cut_height = 1.0 - epsilon;
  std::size_t kept = 0;
  for (const auto& m : tree.merges()) {
    if (m.height <= cut_height)
      ++kept;
    else
      break;
  }
  return kept;
}

ModuleSet cut_prefix(const Dendrogram& tree, std::size_t kept) {
  const int n = tree.n_leaves();
  UnionFind uf(n + static_cast<int>(tree.merges().size()));
  for (std::size_t k = 0; k < kept; ++k) {
    const auto& m = tree.merges()[k];
    const int node = n + static_cast<int>(k);
    uf.parent[static_cast<std::size_t>(uf.find(m.left))] = node;
    uf.parent[static_cast<std::size_t>(uf.find(m.right))] = node;
  }
  std::vector<int> root_to_module(
      static_cast<std::size_t>(n) + tree.merges().size(), -1);
  std::vector<Module> modules;
  for (int leaf = 0; leaf < n; ++leaf) {
    const int root = uf.find(leaf);
    int& mod = root_to_module[static_cast<std::size_t>(root)];
    if (mod == -1) {
      mod = static_cast<int>(modules.size());
      modules.push_back(
          Module{"M" + std::to_string(modules.size() + 1), {}});
    }
    modules[static_cast<std::size_t>(mod)].members.push_back(
        tree.leaves()[static_cast<std::size_t>(leaf)]);
  }
  return ModuleSet(std::move(modules), false);
}

}  // namespace

Dendrogram single_linkage(const CorrelationMatrix& D) {
  const int n = static_cast<int>(D.size());
  auto edges = minimum_spanning_tree(D.values());

  UnionFind uf(n + static_cast<int>(edges.size()));
  std::vector<int> node_of(static_cast<std::size_t>(n) + edges.size());
  std::iota(node_of.begin(), node_of.end(), 0);
  std::vector<DendrogramMerge> merges;
  merges.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const int ra = uf.find(e.i);
    const int rb = uf.find(e.j);
    int left = node_of[static_cast<std::size_t>(ra)];
    int right = node_of[static_cast<std::size_t>(rb)];
    if (left > right) std::swap(left, right);
    const int node = n + static_cast<int>(k);
    uf.parent[static_cast<std::size_t>(ra)] = node;
    uf.parent[static_cast<std::size_t>(rb)] = node;
    node_of[static_cast<std::size_t>(node)] = node;
    double h = std::clamp(e.w, 0.0, 1.0);
    if (!merges.empty()) h = std::max(h, merges.back().height);
    merges.push_back(DendrogramMerge{left, right, h});
  }
  return Dendrogram(D.genes(), std::move(merges));
}

ModuleSet cut(const Dendrogram& tree, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ValidationError("epsilon must be in [0,1], got " +
                          std::to_string(epsilon));
  return cut_prefix(tree, kept_merges(tree, epsilon));
}

std::vector<SweepPoint> threshold_sweep(const Dendrogram& tree, double step) {
  if (!(step > 0.0 && step <= 1.0))
    throw ValidationError("sweep step must be in (0,1], got " +
                          std::to_string(step));
  if (tree.merges().empty())
    throw ValidationError("cannot sweep a single-leaf dendrogram");

  const double smin = 1.0 - tree.merges().back().height;
  const double smax = 1.0 - tree.merges().front().height;
  std::vector<double> thresholds;
  for (std::size_t k = 0;; ++k) {
    const double eps = smin + static_cast<double>(k) * step;
    if (eps >= smax - 1e-12) break;
    thresholds.push_back(eps);
  }
  thresholds.push_back(smax);

  // Endpoint prefixes are fixed by the definition (all merges at the low
  // end, the minimum-height ties at the high end); recomputing them through
  // 1 - (1 - h) can lose an ulp and drop the boundary merge.
  const double hmin = tree.merges().front().height;
  std::size_t min_ties = 0;
  while (min_ties < tree.merges().size() &&
         tree.merges()[min_ties].height == hmin)
    ++min_ties;

  std::vector<SweepPoint> points;
  std::size_t prev_kept = tree.merges().size() + 1;  // impossible sentinel
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const double eps = thresholds[t];
    std::size_t kept;
    if (t == 0)
      kept = tree.merges().size();
    else if (t + 1 == thresholds.size())
      kept = min_ties;
    else
      kept = kept_merges(tree, eps);
    if (kept == prev_kept) continue;
    prev_kept = kept;
    points.push_back(SweepPoint{eps, cut_prefix(tree, kept)});
  }
  return points;
}

}  // namespace modclust::hac
