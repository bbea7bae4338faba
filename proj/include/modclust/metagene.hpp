#pragma once
// Pre-pipeline merge of near-duplicate expression profiles: connected
// components of the signed-PCC > tau relation become meta-genes whose
// profile is the mean of the member rows.

#include <string>
#include <utility>
#include <vector>

#include "modclust/core.hpp"

namespace modclust::metagene {

struct MetageneMap {
  struct Entry {
    std::string id;  // first member's gene id
    std::vector<GeneId> members;
  };
  std::vector<Entry> entries;  // covers every input gene exactly once
};

// Constant profiles are never merged and pass through with a warning.
std::pair<ExpressionMatrix, MetageneMap> merge_metagenes(
    const ExpressionMatrix& expr, double tau = 0.95);

}  // namespace modclust::metagene
