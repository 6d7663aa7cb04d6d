#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "specpol/core.hpp"
#include "specpol/grid.hpp"

namespace specpol {

/// H x W x bands intensity volume, band-major storage [band][row][col].
/// Intensities are linear and unitless; a global scale is unobservable in the
/// pipeline, so no radiometric calibration is attached.
struct SpectralCube {
  int height = 0;
  int width = 0;
  WavelengthGrid grid;
  std::vector<double> data;

  static SpectralCube zeros(int h, int w, const WavelengthGrid& g) {
    SpectralCube c;
    c.height = h;
    c.width = w;
    c.grid = g;
    c.data.assign(static_cast<std::size_t>(h) * w * g.count, 0.0);
    return c;
  }

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return plane_size() * static_cast<std::size_t>(grid.count); }

  double& at(int band, int row, int col) {
    return data[(static_cast<std::size_t>(band) * height + row) * width + col];
  }
  double at(int band, int row, int col) const {
    return data[(static_cast<std::size_t>(band) * height + row) * width + col];
  }

  std::span<double> band(int b) { return {data.data() + b * plane_size(), plane_size()}; }
  std::span<const double> band(int b) const {
    return {data.data() + b * plane_size(), plane_size()};
  }

  bool same_shape(const SpectralCube& o) const {
    return height == o.height && width == o.width && grid == o.grid;
  }
};

/// H x W x 3 image, planar storage [channel][row][col], channel order R,G,B.
struct RGBImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  static RGBImage zeros(int h, int w) {
    RGBImage img;
    img.height = h;
    img.width = w;
    img.data.assign(static_cast<std::size_t>(h) * w * 3, 0.0);
    return img;
  }

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }

  double& at(int channel, int row, int col) {
    return data[(static_cast<std::size_t>(channel) * height + row) * width + col];
  }
  double at(int channel, int row, int col) const {
    return data[(static_cast<std::size_t>(channel) * height + row) * width + col];
  }

  std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const {
    return {data.data() + c * plane_size(), plane_size()};
  }
};

/// Per-pixel, per-band Stokes components. s[0] is intensity; the physical
/// cone constraint s1^2+s2^2+s3^2 <= s0^2 is checked, never enforced here.
struct StokesCube {
  int height = 0;
  int width = 0;
  WavelengthGrid grid;
  std::array<std::vector<double>, 4> s;

  static StokesCube zeros(int h, int w, const WavelengthGrid& g) {
    StokesCube c;
    c.height = h;
    c.width = w;
    c.grid = g;
    for (auto& comp : c.s) comp.assign(static_cast<std::size_t>(h) * w * g.count, 0.0);
    return c;
  }

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t volume() const { return plane_size() * static_cast<std::size_t>(grid.count); }

  double& at(int comp, int band, int row, int col) {
    return s[static_cast<std::size_t>(comp)]
            [(static_cast<std::size_t>(band) * height + row) * width + col];
  }
  double at(int comp, int band, int row, int col) const {
    return s[static_cast<std::size_t>(comp)]
            [(static_cast<std::size_t>(band) * height + row) * width + col];
  }

  /// Extract one Stokes component as a SpectralCube.
  SpectralCube component(int comp) const {
    SpectralCube c;
    c.height = height;
    c.width = width;
    c.grid = grid;
    c.data = s[static_cast<std::size_t>(comp)];
    return c;
  }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct CubeViolation {
  enum Kind { kNaN, kInf, kNegative } kind;
  int band, row, col;
  double value;
};

struct ValidationReport {
  bool ok = true;
  bool dims_consistent = true;
  std::size_t nan_count = 0;
  std::size_t inf_count = 0;
  std::size_t negative_count = 0;
  std::vector<CubeViolation> violations;  // first kMaxListed individual hits

  static constexpr std::size_t kMaxListed = 64;
};

/// Report NaN/Inf/negative voxels and dimension consistency. Never mutates.
inline ValidationReport validate_cube(const SpectralCube& cube) {
  ValidationReport rep;
  rep.dims_consistent =
      cube.data.size() ==
      static_cast<std::size_t>(cube.height) * cube.width * cube.grid.count;
  rep.ok = rep.dims_consistent;
  const int bands = cube.grid.count;
  for (int b = 0; b < bands; ++b) {
    for (int r = 0; r < cube.height; ++r) {
      for (int c = 0; c < cube.width; ++c) {
        const double v = cube.at(b, r, c);
        CubeViolation::Kind kind;
        if (std::isnan(v)) {
          kind = CubeViolation::kNaN;
          ++rep.nan_count;
        } else if (std::isinf(v)) {
          kind = CubeViolation::kInf;
          ++rep.inf_count;
        } else if (v < 0.0) {
          kind = CubeViolation::kNegative;
          ++rep.negative_count;
        } else {
          continue;
        }
        rep.ok = false;
        if (rep.violations.size() < ValidationReport::kMaxListed) {
          rep.violations.push_back({kind, b, r, c, v});
        }
      }
    }
  }
  return rep;
}

/// Count voxels violating s1^2+s2^2+s3^2 <= s0^2 beyond the 1e-6*s0^2
/// tolerance (plus any negative s0). Violations are counted, not rejected.
inline std::size_t count_physical_violations(const StokesCube& cube) {
  std::size_t count = 0;
  const std::size_t n = cube.volume();
  for (std::size_t i = 0; i < n; ++i) {
    const double s0 = cube.s[0][i];
    const double norm2 = sqr(cube.s[1][i]) + sqr(cube.s[2][i]) + sqr(cube.s[3][i]);
    if (s0 < 0.0 || norm2 > sqr(s0) * (1.0 + 1e-6)) ++count;
  }
  return count;
}

/// Project every Stokes vector onto the physical cone: negative s0 becomes a
/// dark pixel, over-polarized vectors are scaled back to |s| = s0.
inline StokesCube clamp_physical(const StokesCube& cube) {
  StokesCube out = cube;
  const std::size_t n = cube.volume();
  for (std::size_t i = 0; i < n; ++i) {
    double& s0 = out.s[0][i];
    if (s0 <= 0.0) {
      s0 = std::max(s0, 0.0);
      out.s[1][i] = out.s[2][i] = out.s[3][i] = 0.0;
      continue;
    }
    const double norm = std::sqrt(sqr(out.s[1][i]) + sqr(out.s[2][i]) + sqr(out.s[3][i]));
    if (norm > s0) {
      const double scale = s0 / norm;
      out.s[1][i] *= scale;
      out.s[2][i] *= scale;
      out.s[3][i] *= scale;
    }
  }
  return out;
}

}  // namespace specpol
