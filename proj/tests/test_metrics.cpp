#include <gtest/gtest.h>

#include <cmath>

#include "specpol/metrics.hpp"

using namespace specpol;

namespace {

SpectralCube random_cube(std::uint64_t seed, int h = 16, int w = 16, int bands = 4) {
  SpectralCube cube =
      SpectralCube::zeros(h, w, WavelengthGrid::make(400, 400 + 10.0 * (bands - 1), 10));
  Rng rng(seed);
  for (double& v : cube.data) v = rng.uniform01();
  return cube;
}

}  // namespace

TEST(Psnr, FormulaAnchors) {
  EXPECT_DOUBLE_EQ(psnr_from_mse(1e-4, 1.0), 40.0);
  EXPECT_DOUBLE_EQ(psnr_from_mse(1e-3, 1.0), 30.0);
  EXPECT_DOUBLE_EQ(psnr_from_mse(0.0, 1.0), 100.0);
}

TEST(Psnr, IdenticalCubesHitTheCap) {
  const SpectralCube cube = random_cube(1);
  EXPECT_DOUBLE_EQ(psnr(cube, cube, 1.0), 100.0);
}

TEST(Psnr, SymmetricAndScaleInvariant) {
  const SpectralCube a = random_cube(2);
  const SpectralCube b = random_cube(3);
  EXPECT_DOUBLE_EQ(psnr(a, b, 1.0), psnr(b, a, 1.0));
  SpectralCube a2 = a, b2 = b;
  for (double& v : a2.data) v *= 3.0;
  for (double& v : b2.data) v *= 3.0;
  EXPECT_NEAR(psnr(a, b, 1.0), psnr(a2, b2, 3.0), 1e-12);
}

TEST(Psnr, ShapeMismatchRejected) {
  EXPECT_THROW(psnr(random_cube(1, 8, 8), random_cube(1, 8, 9), 1.0), shape_error);
}

TEST(Ssim, IdenticalImagesGiveOne) {
  const SpectralCube cube = random_cube(4);
  EXPECT_DOUBLE_EQ(ssim(cube, cube, 1.0), 1.0);
}

TEST(Ssim, NegatedImageScoresBelowOne) {
  const SpectralCube a = random_cube(5, 16, 16, 1);
  double mean = 0.0;
  for (double v : a.data) mean += v;
  mean /= static_cast<double>(a.data.size());
  SpectralCube b = a;
  for (double& v : b.data) v = 2.0 * mean - v;
  EXPECT_LT(ssim(a, b, 1.0), 1.0);
}

TEST(Ssim, ConstantImagesMatchClosedForm) {
  // constant vs constant: structure and contrast terms are exactly 1, the
  // luminance term is (2ab + C1)/(a^2 + b^2 + C1)
  const double va = 0.3, vb = 0.7, peak = 1.0;
  SpectralCube a = SpectralCube::zeros(16, 16, WavelengthGrid::make(500, 500, 10));
  SpectralCube b = a;
  for (double& v : a.data) v = va;
  for (double& v : b.data) v = vb;
  const double c1 = sqr(0.01 * peak);
  const double expected = (2.0 * va * vb + c1) / (va * va + vb * vb + c1);
  EXPECT_NEAR(ssim(a, b, peak), expected, 1e-12);
  EXPECT_LT(expected, 1.0);
}

TEST(SpectralFidelity, SelfIsHundredPercent) {
  std::vector<double> a = {0.2, 0.5, 0.9, 0.4};
  EXPECT_NEAR(spectral_fidelity(a, a), 100.0, 1e-12);
}

TEST(SpectralFidelity, OrthogonalOneHotsAreZero) {
  std::vector<double> a = {1.0, 0.0, 0.0};
  std::vector<double> b = {0.0, 1.0, 0.0};
  EXPECT_DOUBLE_EQ(spectral_fidelity(a, b), 0.0);
}

TEST(SpectralFidelity, ScaleInvariant) {
  std::vector<double> a = {0.2, 0.5, 0.9, 0.4};
  std::vector<double> b = {0.25, 0.45, 0.8, 0.5};
  std::vector<double> b2 = b;
  for (double& v : b2) v *= 17.0;
  EXPECT_NEAR(spectral_fidelity(a, b), spectral_fidelity(a, b2), 1e-12);
}

TEST(SpectralFidelity, ZeroVectorRejected) {
  std::vector<double> a = {0.0, 0.0};
  std::vector<double> b = {1.0, 0.0};
  EXPECT_THROW(spectral_fidelity(a, b), config_error);
}

TEST(Report, SelfComparisonIsPerfect) {
  const SpectralCube cube = random_cube(6);
  const MetricReport rep = compute_report(cube, cube);
  EXPECT_DOUBLE_EQ(rep.psnr_db, 100.0);
  EXPECT_DOUBLE_EQ(rep.ssim_value, 1.0);
  EXPECT_DOUBLE_EQ(rep.mse_value, 0.0);
  EXPECT_NEAR(rep.fidelity_percent, 100.0, 1e-9);
  for (double v : rep.per_band_psnr) EXPECT_DOUBLE_EQ(v, 100.0);
}
