#include <doctest.h>

#include <random>

#include "modclust/deconv.hpp"
#include "oracles.hpp"

using namespace modclust;
using deconv::DeconvConfig;
using deconv::Scaling;

namespace {

DeconvConfig raw_none() {
  DeconvConfig cfg;
  cfg.scaling = Scaling::None;
  cfg.rescale_output = false;
  return cfg;
}

}  // namespace

TEST_CASE("a zero off-diagonal matrix is a fixed point") {
  CorrelationMatrix D({"a", "b", "c"}, Eigen::MatrixXd::Identity(3, 3), {});
  DeconvConfig cfg;
  auto out = deconv::deconvolve(D, cfg);
  CHECK(out.values() == Eigen::MatrixXd::Identity(3, 3));
  CHECK(out.meta().deconvolved);
}

TEST_CASE("the 2x2 spectral map reproduces the hand-computed transform") {
  Eigen::MatrixXd W(2, 2);
  W << 1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0;
  auto out = deconv::deconvolve_raw(W, raw_none());
  // eigenvalues 1 and -1/3 map to 1/2 and -1/2
  CHECK(out(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("auto scaling pins the extreme direct eigenvalue at delta") {
  std::mt19937_64 eng(53);
  for (int t = 0; t < 10; ++t) {
    auto W = oracles::random_symmetric_with_radius(eng, 12, 3.0);
    DeconvConfig cfg;
    cfg.rescale_output = false;
    auto out = deconv::deconvolve_raw(W, cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(top == doctest::Approx(0.95).epsilon(1e-10));
    CHECK(top <= 0.95 + 1e-10);
  }
}

TEST_CASE("convolve closed form matches the hand example") {
  Eigen::MatrixXd D(2, 2);
  D << 0.0, 0.5, 0.5, 0.0;
  auto obs = deconv::convolve(D);
  CHECK(obs(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(obs(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("convolving the zero matrix yields zero") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 4);
  CHECK(deconv::convolve(z) == z);
  CHECK(deconv::convolve(z, 10) == z);
}

TEST_CASE("the truncated series approaches the closed form") {
  std::mt19937_64 eng(59);
  for (int t = 0; t < 5; ++t) {
    auto D = oracles::random_symmetric_with_radius(eng, 8, 0.8);
    auto closed = deconv::convolve(D);
    auto series50 = deconv::convolve(D, 50);
    CHECK((closed - series50).cwiseAbs().maxCoeff() < 1e-4);
  }
  // tight agreement on the 2x2 example
  Eigen::MatrixXd D(2, 2);
  D << 0.0, 0.5, 0.5, 0.0;
  CHECK((deconv::convolve(D) - deconv::convolve(D, 50)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("convolve rejects spectral radius at or above 1") {
  // the computed spectrum decides, so stay clearly away from the boundary
  Eigen::MatrixXd D(2, 2);
  D << 0.0, 1.25, 1.25, 0.0;
  CHECK_THROWS_AS(deconv::convolve(D), SpectralRadiusTooLarge);
}

TEST_CASE("deconvolve inverts convolve to high accuracy") {
  std::mt19937_64 eng(61);
  std::uniform_int_distribution<int> size(3, 20);
  for (int t = 0; t < 20; ++t) {
    const int n = size(eng);
    auto direct = oracles::random_symmetric_with_radius(eng, n, 0.85);
    auto observed = deconv::convolve(direct);
    auto back = deconv::deconvolve_raw(observed, raw_none());
    CHECK((back - direct).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("raw output stays symmetric and shares eigenvectors with the input") {
  std::mt19937_64 eng(67);
  auto W = oracles::random_symmetric_with_radius(eng, 10, 0.8);
  auto out = deconv::deconvolve_raw(W, raw_none());
  CHECK((out - out.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  // commuting with the input certifies a shared eigenbasis
  CHECK((W * out - out * W).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("the spectral map preserves eigenvalue order") {
  std::mt19937_64 eng(71);
  auto W = oracles::random_symmetric_with_radius(eng, 9, 0.9);
  auto out = deconv::deconvolve_raw(W, raw_none());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> in_es(W), out_es(out);
  for (int i = 0; i + 1 < 9; ++i)
    CHECK(out_es.eigenvalues()(i) <= out_es.eigenvalues()(i + 1) + 1e-12);
  // map each input eigenvalue directly and compare the sorted spectra
  Eigen::VectorXd mapped = in_es.eigenvalues();
  for (int i = 0; i < 9; ++i) mapped(i) = mapped(i) / (1.0 + mapped(i));
  std::sort(mapped.begin(), mapped.end());
  CHECK((mapped - out_es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scaling none rejects an eigenvalue at -1") {
  Eigen::MatrixXd W(2, 2);
  W << 0.0, 1.0, 1.0, 0.0;  // eigenvalues +1 and -1
  CHECK_THROWS_AS(deconv::deconvolve_raw(W, raw_none()), SingularShift);
}

TEST_CASE("typed deconvolution rescales into a valid correlation matrix") {
  std::mt19937_64 eng(73);
  auto D = oracles::random_correlation(eng, 8);
  DeconvConfig cfg;
  auto out = deconv::deconvolve(D, cfg);
  CHECK(out.genes() == D.genes());
  for (int i = 0; i < 8; ++i) {
    CHECK(out.values()(i, i) == 1.0);
    for (int j = 0; j < 8; ++j) {
      CHECK(out.values()(i, j) >= 0.0);
      CHECK(out.values()(i, j) <= 1.0);
    }
  }
  // min-max rescale touches the extremes
  double lo = 2.0, hi = -1.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (i != j) {
        lo = std::min(lo, out.values()(i, j));
        hi = std::max(hi, out.values()(i, j));
      }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
}

TEST_CASE("typed deconvolution without rescaling is refused") {
  std::mt19937_64 eng(79);
  auto D = oracles::random_correlation(eng, 4);
  DeconvConfig cfg;
  cfg.rescale_output = false;
  CHECK_THROWS_AS(deconv::deconvolve(D, cfg), ValidationError);
}

TEST_CASE("delta outside (0,1) is rejected") {
  std::mt19937_64 eng(83);
  auto D = oracles::random_correlation(eng, 4);
  DeconvConfig cfg;
  cfg.delta = 1.0;
  CHECK_THROWS_AS(deconv::deconvolve(D, cfg), ValidationError);
  cfg.delta = 0.0;
  CHECK_THROWS_AS(deconv::deconvolve(D, cfg), ValidationError);
}
