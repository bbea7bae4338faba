#pragma once
// Pairwise evaluation against gold standards: confusion counts over gene
// pairs, precision/recall/F, ROC assembly with AUC, best-F selection, knee
// detection, and gold-standard derivation from regulatory edge lists.

#include <cstdint>
#include <utility>
#include <vector>

#include "modclust/core.hpp"
#include "modclust/hac.hpp"

namespace modclust::evalkit {

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  std::uint64_t gold_positive() const { return tp + fn; }
  std::uint64_t gold_negative() const { return fp + tn; }
};

// Counts over all pairs from the intersection of predicted and gold
// coverage.  A pair is gold-positive iff the genes co-occur in at least one
// gold module; predicted-positive likewise over predicted modules.
ConfusionCounts pair_confusion(const ModuleSet& pred, const ModuleSet& gold);

struct Prf {
  double precision = 0.0, recall = 0.0, f = 0.0;
};

// Zero whenever the corresponding denominator vanishes.
Prf precision_recall_f(const ConfusionCounts& c);

// One point per sweep entry plus synthetic (0,0) and (1,1) endpoints,
// ordered by (FPR, TPR).
RocCurve roc(const std::vector<hac::SweepPoint>& sweep, const ModuleSet& gold);

// Trapezoidal area over FPR.
double auc(const RocCurve& curve);

struct BestF {
  double eps = 0.0;
  Prf prf;
};

// Argmax of F over the sweep; ties go to the larger (stricter) epsilon.
BestF best_f(const std::vector<hac::SweepPoint>& sweep, const ModuleSet& gold);

// Index of the interior point with the sharpest turn on the axis-normalized
// curve; angle ties within 1e-9 go to the smallest FPR.
std::size_t knee(const RocCurve& curve);

// One module per regulator (its target set), sizes >= 2, identical sets
// collapsed onto the lexicographically smallest regulator id.
ModuleSet minimal_modules(const std::vector<std::pair<GeneId, GeneId>>& edges);

// Targets grouped by their exact regulator set, singleton groups dropped;
// module ids S1, S2, ... over groups ordered by member list.
ModuleSet strict_modules(const std::vector<std::pair<GeneId, GeneId>>& edges);

}  // namespace modclust::evalkit
