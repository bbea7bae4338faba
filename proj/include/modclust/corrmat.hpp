#pragma once
// Correlation metrics over expression profiles: Pearson, distance
// correlation, and three discretized mutual-information estimators, each
// standardized to [0,1] for the downstream clustering contract.

#include <span>
#include <vector>

#include "modclust/core.hpp"

namespace modclust::corrmat {

enum class Discretization { EqualWidth, EqualFrequency };

struct MetricConfig {
  static constexpr int kAutoBins = 0;

  MetricTag metric = MetricTag::PCC;
  Discretization discretization = Discretization::EqualFrequency;
  int bins = kAutoBins;
};

// Product-moment correlation in [-1,1]; lengths must match and be >= 3.
double pearson(std::span<const double> x, std::span<const double> y);

// Szekely distance correlation in [0,1] via double-centered distance
// matrices; O(m^2) per pair.
double distance_correlation(std::span<const double> x,
                            std::span<const double> y);

// kAutoBins resolves to ceil(sqrt(m)); explicit values must be >= 2.
int resolve_bins(int bins, std::size_t m);

// Equal-width: [min,max] split into equal intervals, last one right-closed.
// Equal-frequency: rank blocks of size ceil(m/bins), ties kept in input
// order.  Constant input yields all-zero labels.
std::vector<int> discretize(std::span<const double> x, Discretization scheme,
                            int bins);

// MI in nats from binned labels, clamped at 0.  MI1 plug-in, MI2 Miller-
// Madow corrected per entropy term, MI3 James-Stein shrinkage toward the
// uniform distribution over the full bin grid.
double mutual_information(const std::vector<int>& xb, const std::vector<int>& yb,
                          MetricTag estimator);

// MI / sqrt(H(X) H(Y)) with estimator-matched entropies, clamped to [0,1].
double normalized_mutual_information(const std::vector<int>& xb,
                                     const std::vector<int>& yb,
                                     MetricTag estimator);

// Standardized pairwise matrix: |PCC|, DCC as-is, or normalized MI.
CorrelationMatrix build_correlation_matrix(const ExpressionMatrix& expr,
                                           const MetricConfig& cfg);

}  // namespace modclust::corrmat
