#pragma once

// Synthetic test scenes so every pipeline run and acceptance check works
// without external datasets: smooth color-checker patches, a four-quadrant
// linear-polarizer target, and circular-polarizer patches.

#include <array>
#include <cmath>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/cube.hpp"
#include "specpol/grid.hpp"
#include "specpol/polarimetry.hpp"

namespace specpol {

namespace detail {

/// Smooth reflectance bump centered at a wavelength, plus a flat floor.
inline double patch_spectrum(double lambda, double center, double width, double floor) {
  return floor + (1.0 - floor) * std::exp(-sqr(lambda - center) / (2.0 * sqr(width)));
}

}  // namespace detail

/// Grid of patches with distinct smooth spectra (unpolarized use: wrap in a
/// StokesCube with s1..s3 = 0).
inline SpectralCube make_checker_cube(int size = 256,
                                      const WavelengthGrid& grid = default_grid(),
                                      int patches_per_side = 4) {
  SpectralCube cube = SpectralCube::zeros(size, size, grid);
  const int patch = size / patches_per_side;
  for (int b = 0; b < grid.count; ++b) {
    const double lambda = grid.wavelength(b);
    auto band = cube.band(b);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        const int pi = std::min(i / patch, patches_per_side - 1);
        const int pj = std::min(j / patch, patches_per_side - 1);
        const int id = pi * patches_per_side + pj;
        // patch centers sweep the visible range; widths alternate
        const double center = 410.0 + 280.0 * id /
                                          (patches_per_side * patches_per_side - 1.0);
        const double width = (id % 2 == 0) ? 35.0 : 60.0;
        const double floor = 0.08 + 0.04 * (id % 3);
        band[static_cast<std::size_t>(i) * size + j] =
            detail::patch_spectrum(lambda, center, width, floor);
      }
    }
  }
  return cube;
}

/// Wrap an intensity cube as an unpolarized Stokes scene.
inline PolarizedScene unpolarized_scene(const SpectralCube& cube) {
  StokesCube st = StokesCube::zeros(cube.height, cube.width, cube.grid);
  st.s[0] = cube.data;
  return PolarizedScene{st};
}

/// Four-quadrant linear-polarizer target. Quadrant q (row-major: top-left,
/// top-right, bottom-left, bottom-right) is fully linearly polarized at
/// angles_deg[q]; each quadrant carries its own smooth spectrum. Defaults
/// follow the 0/45/90/-45 degree layout.
inline PolarizedScene make_polar_target(int size = 256,
                                        const WavelengthGrid& grid = default_grid(),
                                        const std::array<double, 4>& angles_deg = {0.0, 45.0,
                                                                                   90.0,
                                                                                   -45.0}) {
  StokesCube st = StokesCube::zeros(size, size, grid);
  const int half = size / 2;
  for (int b = 0; b < grid.count; ++b) {
    const double lambda = grid.wavelength(b);
    const std::size_t base = static_cast<std::size_t>(b) * st.plane_size();
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        const int q = (i >= half ? 2 : 0) + (j >= half ? 1 : 0);
        const double theta = angles_deg[static_cast<std::size_t>(q)] * M_PI / 180.0;
        const double s0 =
            detail::patch_spectrum(lambda, 430.0 + 80.0 * q, 55.0, 0.15);
        const std::size_t idx = base + static_cast<std::size_t>(i) * size + j;
        st.s[0][idx] = s0;
        st.s[1][idx] = s0 * std::cos(2.0 * theta);
        st.s[2][idx] = s0 * std::sin(2.0 * theta);
      }
    }
  }
  return PolarizedScene{st};
}

/// Two circular-polarizer patches (left: right-circular, S3 = +S0; right:
/// left-circular, S3 = -S0) on an unpolarized background.
inline PolarizedScene make_circular_scene(int size = 256,
                                          const WavelengthGrid& grid = default_grid()) {
  StokesCube st = StokesCube::zeros(size, size, grid);
  const int patch = size / 3;
  const int top = size / 2 - patch / 2;
  const int left_x = size / 6;
  const int right_x = size - size / 6 - patch;
  for (int b = 0; b < grid.count; ++b) {
    const double lambda = grid.wavelength(b);
    const std::size_t base = static_cast<std::size_t>(b) * st.plane_size();
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        const std::size_t idx = base + static_cast<std::size_t>(i) * size + j;
        double s3 = 0.0;
        double s0 = detail::patch_spectrum(lambda, 520.0, 90.0, 0.2);
        if (i >= top && i < top + patch) {
          if (j >= left_x && j < left_x + patch) {
            s3 = s0;  // RCP patch
          } else if (j >= right_x && j < right_x + patch) {
            s3 = -s0;  // LCP patch
          }
        }
        st.s[0][idx] = s0;
        st.s[3][idx] = s3;
      }
    }
  }
  return PolarizedScene{st};
}

/// Axis-aligned interior of one quadrant of the polar target, eroded by a
/// margin; used when averaging reconstructed maps away from quadrant edges.
struct Region {
  int row0, row1, col0, col1;  // half-open
};

inline Region quadrant_interior(int size, int quadrant, int margin) {
  const int half = size / 2;
  const int r0 = (quadrant / 2 == 0) ? 0 : half;
  const int c0 = (quadrant % 2 == 0) ? 0 : half;
  return Region{r0 + margin, r0 + half - margin, c0 + margin, c0 + half - margin};
}

}  // namespace specpol
