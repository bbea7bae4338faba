#include "modclust/corrmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modclust::corrmat {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthMismatch("sequence lengths " + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()));
  if (x.size() < 3)
    throw LengthMismatch("sequences need at least 3 values, got " +
                         std::to_string(x.size()));
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ConstantProfile("zero variance in pearson input");
  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

double distance_correlation(std::span<const double> x,
                            std::span<const double> y) {
  check_lengths(x, y);
  const std::size_t m = x.size();
  std::vector<double> a(m * m), b(m * m), ra(m, 0.0), rb(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double da = std::abs(x[i] - x[j]);
      const double db = std::abs(y[i] - y[j]);
      a[i * m + j] = da;
      b[i * m + j] = db;
      ra[i] += da;
      rb[i] += db;
    }
  double ga = 0.0, gb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ra[i] /= static_cast<double>(m);
    rb[i] /= static_cast<double>(m);
    ga += ra[i];
    gb += rb[i];
  }
  ga /= static_cast<double>(m);
  gb /= static_cast<double>(m);

  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double A = a[i * m + j] - ra[i] - ra[j] + ga;
      const double B = b[i * m + j] - rb[i] - rb[j] + gb;
      sab += A * B;
      saa += A * A;
      sbb += B * B;
    }
  if (saa == 0.0 || sbb == 0.0)
    throw ConstantProfile("zero distance variance in distance correlation input");
  const double ratio = sab / std::sqrt(saa * sbb);
  if (ratio <= 0.0) return 0.0;
  double r = std::sqrt(ratio);
  if (r > 1.0) r = 1.0;
  return r;
}

int resolve_bins(int bins, std::size_t m) {
  if (bins == MetricConfig::kAutoBins) {
    int b = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
    return std::max(b, 2);
  }
  if (bins < 2)
    throw ValidationError("bin count must be >= 2, got " +
                          std::to_string(bins));
  return bins;
}

std::vector<int> discretize(std::span<const double> x, Discretization scheme,
                            int bins) {
  if (bins < 2) throw ValidationError("bin count must be >= 2");
  const std::size_t m = x.size();
  std::vector<int> labels(m, 0);
  if (m == 0) return labels;

  if (scheme == Discretization::EqualWidth) {
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return labels;
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i < m; ++i) {
      int k = static_cast<int>(std::floor((x[i] - lo) / w));
      labels[i] = std::clamp(k, 0, bins - 1);
    }
    return labels;
  }

  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  if (*lo_it == *hi_it) return labels;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  const std::size_t block =
      (m + static_cast<std::size_t>(bins) - 1) / static_cast<std::size_t>(bins);
  for (std::size_t rank = 0; rank < m; ++rank)
    labels[order[rank]] = static_cast<int>(rank / block);
  return labels;
}

namespace {

struct Counts {
  std::vector<std::uint32_t> cells;  // dense over the full label grid
  std::size_t m = 0;
};

Counts marginal_counts(const std::vector<int>& xb) {
  int k = 0;
  for (int v : xb) k = std::max(k, v);
  Counts c;
  c.cells.assign(static_cast<std::size_t>(k) + 1, 0);
  for (int v : xb) ++c.cells[static_cast<std::size_t>(v)];
  c.m = xb.size();
  return c;
}

Counts joint_counts(const std::vector<int>& xb, const std::vector<int>& yb) {
  int kx = 0, ky = 0;
  for (int v : xb) kx = std::max(kx, v);
  for (int v : yb) ky = std::max(ky, v);
  const std::size_t w = static_cast<std::size_t>(ky) + 1;
  Counts c;
  c.cells.assign((static_cast<std::size_t>(kx) + 1) * w, 0);
  for (std::size_t i = 0; i < xb.size(); ++i)
    ++c.cells[static_cast<std::size_t>(xb[i]) * w +
              static_cast<std::size_t>(yb[i])];
  c.m = xb.size();
  return c;
}

double entropy_plugin(const Counts& c) {
  double h = 0.0;
  const double m = static_cast<double>(c.m);
  for (std::uint32_t n : c.cells)
    if (n > 0) {
      const double p = static_cast<double>(n) / m;
      h -= p * std::log(p);
    }
  return h;
}

double entropy_miller_madow(const Counts& c) {
  std::size_t occupied = 0;
  for (std::uint32_t n : c.cells)
    if (n > 0) ++occupied;
  const double corr = occupied > 0
                          ? static_cast<double>(occupied - 1) /
                                (2.0 * static_cast<double>(c.m))
                          : 0.0;
  return entropy_plugin(c) + corr;
}

// James-Stein shrinkage toward the uniform distribution over the full grid,
// intensity by the Schaefer-Strimmer closed form, clamped to [0,1].
double entropy_shrink(const Counts& c) {
  const std::size_t K = c.cells.size();
  const double m = static_cast<double>(c.m);
  const double t = 1.0 / static_cast<double>(K);
  double sum_p2 = 0.0, sum_dev2 = 0.0;
  for (std::uint32_t n : c.cells) {
    const double p = static_cast<double>(n) / m;
    sum_p2 += p * p;
    sum_dev2 += (t - p) * (t - p);
  }
  double lambda;
  if (c.m <= 1 || sum_dev2 == 0.0)
    lambda = 1.0;
  else
    lambda = (1.0 - sum_p2) / ((m - 1.0) * sum_dev2);
  lambda = std::clamp(lambda, 0.0, 1.0);
  double h = 0.0;
  for (std::uint32_t n : c.cells) {
    const double p = lambda * t + (1.0 - lambda) * static_cast<double>(n) / m;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy(const Counts& c, MetricTag est) {
  switch (est) {
    case MetricTag::MI1: return entropy_plugin(c);
    case MetricTag::MI2: return entropy_miller_madow(c);
    case MetricTag::MI3: return entropy_shrink(c);
    default:
      throw ValidationError("entropy estimator must be one of mi1/mi2/mi3");
  }
}

}  // namespace

double mutual_information(const std::vector<int>& xb,
                          const std::vector<int>& yb, MetricTag estimator) {
  if (xb.size() != yb.size())
    throw LengthMismatch("label lengths " + std::to_string(xb.size()) +
                         " vs " + std::to_string(yb.size()));
  const double hx = entropy(marginal_counts(xb), estimator);
  const double hy = entropy(marginal_counts(yb), estimator);
  const double hxy = entropy(joint_counts(xb, yb), estimator);
  const double mi = hx + hy - hxy;
  return mi > 0.0 ? mi : 0.0;
}

double normalized_mutual_information(const std::vector<int>& xb,
                                     const std::vector<int>& yb,
                                     MetricTag estimator) {
  const double mi = mutual_information(xb, yb, estimator);
  const double hx = entropy(marginal_counts(xb), estimator);
  const double hy = entropy(marginal_counts(yb), estimator);
  if (hx <= 0.0 || hy <= 0.0) return 0.0;
  const double nmi = mi / std::sqrt(hx * hy);
  return std::clamp(nmi, 0.0, 1.0);
}

CorrelationMatrix build_correlation_matrix(const ExpressionMatrix& expr,
                                           const MetricConfig& cfg) {
  const Eigen::Index n = expr.n_genes();
  if (n < 2)
    throw ValidationError("correlation needs at least 2 gene profiles");
  const std::size_t m = static_cast<std::size_t>(expr.n_samples());

  std::vector<std::vector<double>> profiles(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& p = profiles[static_cast<std::size_t>(i)];
    p.resize(m);
    for (std::size_t j = 0; j < m; ++j)
      p[j] = expr.values()(i, static_cast<Eigen::Index>(j));
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    if (*lo == *hi)
      throw ConstantProfile("gene '" +
                            expr.genes()[static_cast<std::size_t>(i)] +
                            "' has a constant profile");
  }

  const bool is_mi = cfg.metric == MetricTag::MI1 ||
                     cfg.metric == MetricTag::MI2 ||
                     cfg.metric == MetricTag::MI3;
  std::vector<std::vector<int>> labels;
  if (is_mi) {
    const int bins = resolve_bins(cfg.bins, m);
    labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] =
          discretize(profiles[static_cast<std::size_t>(i)],
                     cfg.discretization, bins);
  }

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) values(i, i) = 1.0;

  const auto pair_value = [&](std::size_t i, std::size_t j) -> double {
    switch (cfg.metric) {
      case MetricTag::PCC:
        return std::abs(pearson(profiles[i], profiles[j]));
      case MetricTag::DCC:
        return distance_correlation(profiles[i], profiles[j]);
      default:
        return normalized_mutual_information(labels[i], labels[j], cfg.metric);
    }
  };

#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = pair_value(static_cast<std::size_t>(i),
                                  static_cast<std::size_t>(j));
      values(i, j) = v;
      values(j, i) = v;
    }

  MatrixMeta meta;
  meta.metric = cfg.metric;
  return CorrelationMatrix(expr.genes(), std::move(values), meta);
}

}  // namespace modclust::corrmat
