#pragma once
// Single-linkage agglomerative clustering over dissimilarities 1 - s,
// built from the minimum spanning tree, plus dendrogram cutting and
// threshold sweeping.

#include <vector>

#include "modclust/core.hpp"

namespace modclust::hac {

// Merge heights are the sorted MST edge weights; equal-weight edges are
// ordered by their (row, column) index pair.
Dendrogram single_linkage(const CorrelationMatrix& D);

// Connected components after keeping merges with height <= 1 - epsilon;
// singletons are retained as size-1 modules.  Module ids follow the
// smallest contained leaf index.
ModuleSet cut(const Dendrogram& tree, double epsilon);

struct SweepPoint {
  double eps = 0.0;
  ModuleSet modules;
};

// Thresholds from the smallest to the largest merge similarity inclusive in
// increments of step; consecutive duplicate clusterings keep the first.
std::vector<SweepPoint> threshold_sweep(const Dendrogram& tree, double step);

}  // namespace modclust::hac
