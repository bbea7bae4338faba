#include "modclust/deconv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace modclust::deconv {

namespace {

void check_config(const DeconvConfig& cfg) {
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw ValidationError("delta must be in (0,1), got " +
                          std::to_string(cfg.delta));
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose(
    const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw NonConvergentEigensolve("symmetric eigendecomposition failed");
  return es;
}

}  // namespace

Eigen::MatrixXd deconvolve_raw(const Eigen::MatrixXd& W,
                               const DeconvConfig& cfg) {
  check_config(cfg);
  if (W.rows() != W.cols())
    throw ValidationError("deconvolution input must be square");
  const Eigen::MatrixXd S = (W + W.transpose()) / 2.0;
  auto es = decompose(S);
  const Eigen::VectorXd& lam = es.eigenvalues();

  double alpha = 1.0;
  if (cfg.scaling == Scaling::Auto) {
    const double lmax = lam(lam.size() - 1);
    const double lmin = lam(0);
    if (lmax > 0.0)
      alpha = std::min(alpha, cfg.delta / ((1.0 - cfg.delta) * lmax));
    if (lmin < 0.0)
      alpha = std::min(alpha, cfg.delta / ((1.0 + cfg.delta) * (-lmin)));
  } else {
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (std::abs(1.0 + lam(i)) < 1e-12)
        throw SingularShift("observed eigenvalue at -1 cannot be inverted");
  }

  Eigen::VectorXd mapped(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double al = alpha * lam(i);
    mapped(i) = al / (1.0 + al);
  }
  return es.eigenvectors() * mapped.asDiagonal() *
         es.eigenvectors().transpose();
}

CorrelationMatrix deconvolve(const CorrelationMatrix& D,
                             const DeconvConfig& cfg) {
  if (!cfg.rescale_output)
    throw ValidationError(
        "deconvolve requires rescale_output; use deconvolve_raw for the "
        "unrescaled transform");
  Eigen::MatrixXd W = D.values();
  W.diagonal().setZero();
  Eigen::MatrixXd raw = deconvolve_raw(W, cfg);

  const Eigen::Index n = raw.rows();
  raw = ((raw + raw.transpose()) / 2.0).eval();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      lo = std::min(lo, raw(i, j));
      hi = std::max(hi, raw(i, j));
    }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      raw(i, j) = hi > lo ? (raw(i, j) - lo) / (hi - lo)
                          : std::clamp(raw(i, j), 0.0, 1.0);
    }
  raw.diagonal().setOnes();

  MatrixMeta meta = D.meta();
  meta.deconvolved = true;
  return CorrelationMatrix(D.genes(), std::move(raw), meta);
}

Eigen::MatrixXd convolve(const Eigen::MatrixXd& D_dir, int order) {
  if (D_dir.rows() != D_dir.cols())
    throw ValidationError("convolution input must be square");
  if (order != kClosedForm && order < 1)
    throw ValidationError("series order must be >= 1");
  const Eigen::MatrixXd S = (D_dir + D_dir.transpose()) / 2.0;
  auto es = decompose(S);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double radius =
      std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  if (radius >= 1.0)
    throw SpectralRadiusTooLarge("spectral radius " + std::to_string(radius) +
                                 " is not below 1");

  if (order == kClosedForm) {
    Eigen::VectorXd mapped(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      mapped(i) = lam(i) / (1.0 - lam(i));
    return es.eigenvectors() * mapped.asDiagonal() *
           es.eigenvectors().transpose();
  }

  Eigen::MatrixXd sum = S;
  Eigen::MatrixXd power = S;
  for (int k = 2; k <= order; ++k) {
    power = (power * S).eval();
    sum += power;
  }
  return sum;
}

}  // namespace modclust::deconv
