#include <gtest/gtest.h>

#include <cmath>

#include "specpol/cube.hpp"
#include "specpol/grid.hpp"
#include "specpol/response.hpp"

using namespace specpol;

TEST(WavelengthGrid, DefaultEnumeratesVisibleRange) {
  const WavelengthGrid g = default_grid();
  EXPECT_EQ(g.count, 31);
  const auto ws = g.wavelengths();
  ASSERT_EQ(ws.size(), 31u);
  for (int i = 0; i < 31; ++i) EXPECT_DOUBLE_EQ(ws[static_cast<std::size_t>(i)], 400.0 + 10.0 * i);
  EXPECT_DOUBLE_EQ(ws.front(), 400.0);
  EXPECT_DOUBLE_EQ(ws.back(), 700.0);
}

TEST(WavelengthGrid, RejectsNonDividingStep) {
  EXPECT_THROW(WavelengthGrid::make(400.0, 700.0, 7.0), config_error);
  EXPECT_THROW(WavelengthGrid::make(700.0, 400.0, 10.0), config_error);
  EXPECT_THROW(WavelengthGrid::make(400.0, 700.0, -10.0), config_error);
}

TEST(ValidateCube, AllZeroCubeIsOk) {
  const SpectralCube cube = SpectralCube::zeros(4, 4, default_grid());
  const ValidationReport rep = validate_cube(cube);
  EXPECT_TRUE(rep.ok);
  EXPECT_TRUE(rep.dims_consistent);
  EXPECT_EQ(rep.nan_count + rep.inf_count + rep.negative_count, 0u);
  EXPECT_TRUE(rep.violations.empty());
}

TEST(ValidateCube, SingleNaNIsNamed) {
  SpectralCube cube = SpectralCube::zeros(4, 4, default_grid());
  cube.at(5, 0, 0) = std::nan("");
  const ValidationReport rep = validate_cube(cube);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.nan_count, 1u);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].kind, CubeViolation::kNaN);
  EXPECT_EQ(rep.violations[0].band, 5);
  EXPECT_EQ(rep.violations[0].row, 0);
  EXPECT_EQ(rep.violations[0].col, 0);
}

TEST(ValidateCube, NegativeValueCounted) {
  SpectralCube cube = SpectralCube::zeros(4, 4, default_grid());
  cube.at(0, 1, 2) = -0.1;
  const ValidationReport rep = validate_cube(cube);
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.negative_count, 1u);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].kind, CubeViolation::kNegative);
}

TEST(StokesCube, ViolationCountingAndClamping) {
  StokesCube cube = StokesCube::zeros(2, 2, WavelengthGrid::make(500, 510, 10));
  // physical pixel
  cube.at(0, 0, 0, 0) = 1.0;
  cube.at(1, 0, 0, 0) = 0.5;
  // over-polarized pixel
  cube.at(0, 0, 0, 1) = 1.0;
  cube.at(1, 0, 0, 1) = 0.9;
  cube.at(2, 0, 0, 1) = 0.9;
  EXPECT_EQ(count_physical_violations(cube), 1u);

  const StokesCube clamped = clamp_physical(cube);
  EXPECT_EQ(count_physical_violations(clamped), 0u);
  const double norm = std::hypot(clamped.at(1, 0, 0, 1), clamped.at(2, 0, 0, 1));
  EXPECT_NEAR(norm, clamped.at(0, 0, 0, 1), 1e-12);
  // untouched physical pixel
  EXPECT_DOUBLE_EQ(clamped.at(1, 0, 0, 0), 0.5);
}

TEST(ResponseTable, DefaultIsNonnegativeAndValid) {
  const ResponseTable table = make_default_response(default_grid());
  table.validate();
  for (int b = 0; b < table.grid.count; ++b) {
    for (int c = 0; c < 3; ++c) EXPECT_GE(table.weight(b, c), 0.0);
  }
  // 550 nm is green-dominant under the default curves
  const int band550 = 15;
  EXPECT_GT(table.weight(band550, 1), table.weight(band550, 0));
  EXPECT_GT(table.weight(band550, 1), table.weight(band550, 2));
}

TEST(ResponseTable, MismatchedRowsRejected) {
  ResponseTable table = make_default_response(default_grid());
  table.t_polarizer.pop_back();
  EXPECT_THROW(table.validate(), shape_error);
}
