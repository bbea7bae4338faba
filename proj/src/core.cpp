#include "modclust/core.hpp"

#include <cmath>
#include <iostream>
#include <unordered_set>

namespace modclust {

bool valid_gene_id(const GeneId& id) {
  if (id.empty()) return false;
  for (char c : id)
    if (c == '\t' || c == '\n' || c == '\r') return false;
  return true;
}

void warn(const std::string& msg) {
  std::cerr << "[modclust] warning: " << msg << "\n";
}

std::string to_string(MetricTag m) {
  switch (m) {
    case MetricTag::PCC: return "pcc";
    case MetricTag::DCC: return "dcc";
    case MetricTag::MI1: return "mi1";
    case MetricTag::MI2: return "mi2";
    case MetricTag::MI3: return "mi3";
  }
  return "pcc";
}

std::optional<MetricTag> metric_from_string(const std::string& s) {
  if (s == "pcc") return MetricTag::PCC;
  if (s == "dcc") return MetricTag::DCC;
  if (s == "mi1") return MetricTag::MI1;
  if (s == "mi2") return MetricTag::MI2;
  if (s == "mi3") return MetricTag::MI3;
  return std::nullopt;
}

namespace {

std::unordered_map<GeneId, Eigen::Index> build_index(
    const std::vector<GeneId>& genes) {
  std::unordered_map<GeneId, Eigen::Index> idx;
  idx.reserve(genes.size());
  for (std::size_t i = 0; i < genes.size(); ++i) {
    if (!valid_gene_id(genes[i]))
      throw ValidationError("bad gene identifier at position " +
                            std::to_string(i));
    if (!idx.emplace(genes[i], static_cast<Eigen::Index>(i)).second)
      throw ValidationError("duplicate gene identifier '" + genes[i] + "'");
  }
  return idx;
}

}  // namespace

ExpressionMatrix::ExpressionMatrix(std::vector<GeneId> genes,
                                   std::vector<std::string> samples,
                                   Eigen::MatrixXd values)
    : genes_(std::move(genes)),
      samples_(std::move(samples)),
      values_(std::move(values)) {
  if (genes_.empty())
    throw ValidationError("expression matrix needs at least one gene");
  if (samples_.size() < 3)
    throw ValidationError("expression matrix needs at least 3 samples, got " +
                          std::to_string(samples_.size()));
  if (values_.rows() != static_cast<Eigen::Index>(genes_.size()) ||
      values_.cols() != static_cast<Eigen::Index>(samples_.size()))
    throw ValidationError("expression value shape does not match labels");
  if (!values_.allFinite())
    throw ValidationError("expression matrix contains non-finite values");
  index_ = build_index(genes_);
}

std::optional<Eigen::Index> ExpressionMatrix::index_of(const GeneId& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CorrelationMatrix::CorrelationMatrix(std::vector<GeneId> genes,
                                     Eigen::MatrixXd values, MatrixMeta meta)
    : genes_(std::move(genes)), values_(std::move(values)), meta_(meta) {
  const Eigen::Index n = values_.rows();
  if (values_.cols() != n)
    throw ValidationError("correlation matrix must be square");
  if (n != static_cast<Eigen::Index>(genes_.size()))
    throw ValidationError("correlation matrix size does not match gene list");
  if (n < 2)
    throw ValidationError("correlation matrix needs at least 2 genes");
  if (!values_.allFinite())
    throw ValidationError("correlation matrix contains non-finite values");

  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double gap = std::abs(values_(i, j) - values_(j, i));
      if (gap > kTolerance)
        throw AsymmetricMatrix("entry (" + std::to_string(i) + "," +
                               std::to_string(j) + ") differs from transpose by " +
                               std::to_string(gap));
    }
  values_ = ((values_ + values_.transpose()) / 2.0).eval();

  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = values_(i, i);
    if (std::abs(d - 1.0) > kTolerance)
      throw BadDiagonal("diagonal entry " + std::to_string(i) + " is " +
                        std::to_string(d));
    values_(i, i) = 1.0;
  }

  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = values_(i, j);
      if (v < -kTolerance || v > 1.0 + kTolerance)
        throw OutOfRangeEntry("entry (" + std::to_string(i) + "," +
                              std::to_string(j) + ") = " + std::to_string(v));
      if (v < 0.0) values_(i, j) = 0.0;
      if (v > 1.0) values_(i, j) = 1.0;
    }

  index_ = build_index(genes_);
}

std::optional<Eigen::Index> CorrelationMatrix::index_of(const GeneId& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PriorClusterSet::PriorClusterSet(std::vector<PriorCluster> clusters)
    : clusters_(std::move(clusters)) {
  std::unordered_set<std::string> names;
  for (const auto& c : clusters_) {
    if (c.name.empty() || c.name.find('\t') != std::string::npos)
      throw ValidationError("bad prior cluster name");
    if (!names.insert(c.name).second)
      throw ValidationError("duplicate prior cluster name '" + c.name + "'");
    if (c.members.size() < 2)
      throw EmptyPriorCluster("prior cluster '" + c.name +
                              "' needs at least 2 genes");
    std::unordered_set<GeneId> seen;
    for (const auto& g : c.members) {
      if (!valid_gene_id(g))
        throw ValidationError("bad gene id in prior cluster '" + c.name + "'");
      if (!seen.insert(g).second)
        throw ValidationError("duplicate gene '" + g + "' in prior cluster '" +
                              c.name + "'");
    }
  }
}

Dendrogram::Dendrogram(std::vector<GeneId> leaves,
                       std::vector<DendrogramMerge> merges)
    : leaves_(std::move(leaves)), merges_(std::move(merges)) {
  const int n = static_cast<int>(leaves_.size());
  if (n < 1) throw ValidationError("dendrogram needs at least one leaf");
  if (merges_.size() != static_cast<std::size_t>(n - 1))
    throw ValidationError("dendrogram over " + std::to_string(n) +
                          " leaves needs exactly " + std::to_string(n - 1) +
                          " merges, got " + std::to_string(merges_.size()));
  build_index(leaves_);  // validates leaf ids and uniqueness

  std::vector<char> used(static_cast<std::size_t>(n) + merges_.size(), 0);
  double prev = -1.0;
  for (std::size_t k = 0; k < merges_.size(); ++k) {
    const auto& m = merges_[k];
    const int limit = n + static_cast<int>(k);
    for (int child : {m.left, m.right}) {
      if (child < 0 || child >= limit)
        throw ValidationError("merge " + std::to_string(k) +
                              " references invalid node " +
                              std::to_string(child));
      if (used[static_cast<std::size_t>(child)])
        throw ValidationError("node " + std::to_string(child) +
                              " merged twice");
      used[static_cast<std::size_t>(child)] = 1;
    }
    if (m.left == m.right)
      throw ValidationError("merge " + std::to_string(k) + " joins a node to itself");
    if (!(m.height >= 0.0) || !(m.height <= 1.0) || !std::isfinite(m.height))
      throw ValidationError("merge height " + std::to_string(m.height) +
                            " outside [0,1]");
    if (m.height < prev)
      throw ValidationError("merge heights decrease at step " +
                            std::to_string(k));
    prev = m.height;
  }
}

ModuleSet::ModuleSet(std::vector<Module> modules, bool overlapping)
    : modules_(std::move(modules)), overlapping_(overlapping) {
  std::unordered_set<std::string> ids;
  std::unordered_set<GeneId> all;
  for (const auto& mod : modules_) {
    if (mod.id.empty() || mod.id.find('\t') != std::string::npos)
      throw ValidationError("bad module id");
    if (!ids.insert(mod.id).second)
      throw ValidationError("duplicate module id '" + mod.id + "'");
    if (mod.members.empty())
      throw ValidationError("module '" + mod.id + "' is empty");
    std::unordered_set<GeneId> local;
    for (const auto& g : mod.members) {
      if (!valid_gene_id(g))
        throw ValidationError("bad gene id in module '" + mod.id + "'");
      if (!local.insert(g).second)
        throw ValidationError("duplicate gene '" + g + "' in module '" +
                              mod.id + "'");
      if (!overlapping_ && !all.insert(g).second)
        throw ValidationError("gene '" + g +
                              "' appears in two modules of a disjoint set");
    }
  }
}

std::vector<GeneId> ModuleSet::covered_genes() const {
  std::vector<GeneId> out;
  std::unordered_set<GeneId> seen;
  for (const auto& mod : modules_)
    for (const auto& g : mod.members)
      if (seen.insert(g).second) out.push_back(g);
  return out;
}

}  // namespace modclust
