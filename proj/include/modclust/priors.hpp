#pragma once
// Prior-cluster supervision: magnify the correlation sub-block of each prior
// cluster by dividing its off-diagonals by gamma = rho * d(C), where d(C) is
// the block's max off-diagonal and rho is resolved from a dataset-wide
// reliability knob rho_hat in [0,1] (0 = certain, 1 = supervision off).

#include <utility>
#include <vector>

#include "modclust/core.hpp"

namespace modclust::priors {

enum class RhoPolicy { Fixed, Certain, Off };
enum class Mode { Global, Local };

struct SupervisionConfig {
  RhoPolicy policy = RhoPolicy::Fixed;
  double rho_hat = 0.25;  // consulted only for Fixed
  Mode mode = Mode::Global;
};

// One prior cluster per connected component of size >= 2 over the edges,
// named by its lexicographically smallest member.
PriorClusterSet communities_from_edges(
    const std::vector<GeneId>& genes,
    const std::vector<std::pair<GeneId, GeneId>>& edges);

// Divides the off-diagonals of the sub-block restricted to cluster members
// present in D; genes absent from D are dropped with a warning.
CorrelationMatrix magnify_cluster(const CorrelationMatrix& D,
                                  const PriorCluster& cluster,
                                  const SupervisionConfig& cfg);

// One matrix; each pair uses the smallest gamma over the clusters containing
// both genes (single strongest magnification, no stacking).
CorrelationMatrix incorporate_global(const CorrelationMatrix& D,
                                     const PriorClusterSet& priors,
                                     const SupervisionConfig& cfg);

// One matrix per cluster, in cluster order.
std::vector<std::pair<std::string, CorrelationMatrix>> incorporate_local(
    const CorrelationMatrix& D, const PriorClusterSet& priors,
    const SupervisionConfig& cfg);

}  // namespace modclust::priors
