#pragma once
// Network deconvolution: separate direct from observed correlation through
// the spectral map lambda -> alpha*lambda / (1 + alpha*lambda), plus the
// forward convolution operator used as its test oracle.

#include <Eigen/Dense>

#include "modclust/core.hpp"

namespace modclust::deconv {

enum class Scaling { Auto, None };

struct DeconvConfig {
  double delta = 0.95;  // target bound on direct-eigenvalue magnitudes
  Scaling scaling = Scaling::Auto;
  bool rescale_output = true;
};

// Pure spectral transform of W taken as-is (the caller controls the
// diagonal); no output rescaling.  Scaling::Auto picks the largest
// alpha in (0,1] keeping every mapped eigenvalue within +-delta.
Eigen::MatrixXd deconvolve_raw(const Eigen::MatrixXd& W,
                               const DeconvConfig& cfg);

// Zeroes the diagonal, applies the spectral transform, min-max rescales the
// off-diagonals to [0,1], and restores the unit diagonal.  Requires
// rescale_output (the raw variant serves the unrescaled case).
CorrelationMatrix deconvolve(const CorrelationMatrix& D,
                             const DeconvConfig& cfg);

inline constexpr int kClosedForm = -1;

// Observed matrix from a direct one: closed form D (I - D)^-1, or the
// truncated series sum of D^k for k = 1..order.  Spectral radius must be
// below 1.
Eigen::MatrixXd convolve(const Eigen::MatrixXd& D_dir, int order = kClosedForm);

}  // namespace modclust::deconv
